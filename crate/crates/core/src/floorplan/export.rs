use std::fmt::Write as _;

use super::component::{ComponentKind, FloorComponent, Geometry};
use crate::error::Result;
use crate::geometry::{Point2, Rect};

pub fn to_json(components: &[FloorComponent]) -> Result<String> {
    Ok(serde_json::to_string_pretty(components)?)
}

fn color(kind: ComponentKind) -> &'static str {
    match kind {
        ComponentKind::Passage => "#9ecae1",
        ComponentKind::Entrance => "#31a354",
        ComponentKind::Room => "#fdae6b",
        ComponentKind::Block => "#de2d26",
    }
}

/// SVG drawing with the y axis pointing up.
pub fn to_svg(components: &[FloorComponent]) -> String {
    let bounds = components
        .iter()
        .filter_map(|c| c.geometry.bounds())
        .reduce(|a, b| Rect::new(Point2::new(a.min.x.min(b.min.x), a.min.y.min(b.min.y)), Point2::new(a.max.x.max(b.max.x), a.max.y.max(b.max.y))))
        .unwrap_or(Rect::from_size(1.0, 1.0));
    let pad = 1.0;
    let (w, h) = (bounds.width() + 2.0 * pad, bounds.height() + 2.0 * pad);
    let tx = |p: Point2| (p.x - bounds.min.x + pad, bounds.max.y - p.y + pad);
    let pts = |ps: &[Point2]| ps.iter().map(|&p| tx(p)).map(|(x, y)| format!("{x:.3},{y:.3}")).collect::<Vec<_>>().join(" ");
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {w:.3} {h:.3}">"#);
    // rooms first so passages draw on top
    let mut order: Vec<&FloorComponent> = components.iter().collect();
    order.sort_by_key(|c| (c.kind != ComponentKind::Room, c.id));
    for c in order {
        let stroke = if c.locked { r#" stroke="black" stroke-width="0.15""# } else { "" };
        match &c.geometry {
            Geometry::Polyline { points, width } => {
                let _ = writeln!(
                    s,
                    r#"<polyline id="c{}" points="{}" fill="none" stroke="{}" stroke-width="{width:.3}" stroke-opacity="0.6"/>"#,
                    c.id,
                    pts(points),
                    color(c.kind)
                );
            }
            Geometry::Area { hull, rect } => {
                let poly = match rect {
                    Some(r) => r.to_polygon().vertices,
                    None => hull.clone(),
                };
                let _ = writeln!(s, r#"<polygon id="c{}" points="{}" fill="{}" fill-opacity="0.5"{stroke}/>"#, c.id, pts(&poly), color(c.kind));
            }
            Geometry::Point { at, width } => {
                let (x, y) = tx(*at);
                let _ = writeln!(s, r#"<circle id="c{}" cx="{x:.3}" cy="{y:.3}" r="{:.3}" fill="{}"{stroke}/>"#, c.id, width / 2.0, color(c.kind));
            }
        }
    }
    s.push_str("</svg>\n");
    s
}
