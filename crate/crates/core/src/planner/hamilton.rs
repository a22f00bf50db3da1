use crate::geometry::Point2;

/// Improvement passes allowed in local search.
pub const MAX_PASSES: usize = 10_000;

const LATTICE_EPS: f64 = 1e-9;

/// Sorted distinct values, merging ones closer than `LATTICE_EPS`.
fn distinct(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() < LATTICE_EPS);
    v
}

/// Serpentine order if `points` is a complete rectangular lattice.
fn serpentine(points: &[Point2]) -> Option<Vec<Point2>> {
    let xs = distinct(points.iter().map(|p| p.x).collect());
    let ys = distinct(points.iter().map(|p| p.y).collect());
    if xs.len() * ys.len() != points.len() {
        return None;
    }
    let find = |v: &[f64], x: f64| v.iter().position(|&u| (u - x).abs() < LATTICE_EPS);
    let mut grid = vec![None; points.len()];
    for p in points {
        let (i, j) = (find(&xs, p.x)?, find(&ys, p.y)?);
        let slot = &mut grid[j * xs.len() + i];
        if slot.is_some() {
            return None;
        }
        *slot = Some(*p);
    }
    let mut out = Vec::with_capacity(points.len());
    for j in 0..ys.len() {
        let row = &grid[j * xs.len()..(j + 1) * xs.len()];
        if j % 2 == 0 {
            out.extend(row.iter().map(|p| p.expect("complete")));
        } else {
            out.extend(row.iter().rev().map(|p| p.expect("complete")));
        }
    }
    Some(out)
}

fn nearest_neighbor(points: &[Point2], first: usize) -> Vec<Point2> {
    let mut left: Vec<Point2> = points.to_vec();
    let mut cur = left.swap_remove(first);
    let mut out = vec![cur];
    while !left.is_empty() {
        let k = (0..left.len())
            .min_by(|&a, &b| left[a].dist(cur).total_cmp(&left[b].dist(cur)).then(a.cmp(&b)))
            .expect("non-empty");
        cur = left.remove(k);
        out.push(cur);
    }
    out
}

/// Segment reversal on an open path with a fixed first point.
fn two_opt_pass(p: &mut [Point2]) -> bool {
    let n = p.len();
    let mut improved = false;
    for i in 1..n.saturating_sub(1) {
        for j in i + 1..n {
            let before = p[i - 1].dist(p[i]) + if j + 1 < n { p[j].dist(p[j + 1]) } else { 0.0 };
            let after = p[i - 1].dist(p[j]) + if j + 1 < n { p[i].dist(p[j + 1]) } else { 0.0 };
            if after < before - 1e-12 {
                p[i..=j].reverse();
                improved = true;
            }
        }
    }
    improved
}

/// Moves a run of one to three points elsewhere, either orientation.
fn or_opt_pass(p: &mut Vec<Point2>) -> bool {
    let n = p.len();
    let mut improved = false;
    for len in 1..=3usize {
        let mut i = 1;
        while i + len <= n {
            let j = i + len - 1;
            let prev = p[i - 1];
            let next = p.get(j + 1).copied();
            let gain = prev.dist(p[i]) + next.map_or(0.0, |q| p[j].dist(q) - prev.dist(q));
            // rest = p without the run; rest[m] maps back into p
            let rest = |m: usize| if m < i { p[m] } else { p[m + len] };
            let rest_len = n - len;
            let mut best: Option<(f64, usize, bool)> = None;
            for k in 1..=rest_len {
                if k == i {
                    continue;
                }
                let a = rest(k - 1);
                let b = if k < rest_len { Some(rest(k)) } else { None };
                for rev in [false, true] {
                    let (first, last) = if rev { (p[j], p[i]) } else { (p[i], p[j]) };
                    let add = a.dist(first) + b.map_or(0.0, |b| last.dist(b) - a.dist(b));
                    if add < gain - 1e-9 && best.is_none_or(|(d, _, _)| add < d) {
                        best = Some((add, k, rev));
                    }
                }
            }
            if let Some((_, k, rev)) = best {
                let mut seg: Vec<Point2> = p.drain(i..=j).collect();
                if rev {
                    seg.reverse();
                }
                p.splice(k..k, seg);
                improved = true;
            }
            i += 1;
        }
    }
    improved
}

/// Open path through every point, starting at the point closest to
/// `start`.
///
/// A complete rectangular lattice gets the serpentine order: rows from the
/// bottom, the first row left to right. Anything else gets nearest-neighbour
/// construction followed by 2-opt and or-opt until neither improves, so no
/// two path edges cross.
pub fn shortest_hamilton_path(points: &[Point2], start: Point2) -> Vec<Point2> {
    if points.len() <= 1 {
        return points.to_vec();
    }
    if let Some(path) = serpentine(points) {
        if path[0].dist(start) <= points.iter().map(|p| p.dist(start)).fold(f64::INFINITY, f64::min) + LATTICE_EPS {
            return path;
        }
    }
    let first = (0..points.len())
        .min_by(|&a, &b| points[a].dist(start).total_cmp(&points[b].dist(start)).then(a.cmp(&b)))
        .expect("non-empty");
    let mut path = nearest_neighbor(points, first);
    for _ in 0..MAX_PASSES {
        let a = two_opt_pass(&mut path);
        let b = or_opt_pass(&mut path);
        if !a && !b {
            break;
        }
    }
    path
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::polyline_length;
    use crate::geometry::segments_intersect;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn lattice(k: usize, s: f64) -> Vec<Point2> {
        let mut v = Vec::new();
        for j in 0..k {
            for i in 0..k {
                v.push(Point2::new(i as f64 * s, j as f64 * s));
            }
        }
        v
    }

    /// Exhaustive search over all orders with the same first point.
    fn exhaustive(points: &[Point2], first: Point2) -> f64 {
        let rest: Vec<Point2> = points.iter().copied().filter(|p| *p != first).collect();
        let mut idx: Vec<usize> = (0..rest.len()).collect();
        let mut best = f64::INFINITY;
        // Heap's algorithm
        let n = idx.len();
        let mut c = vec![0usize; n];
        let eval = |idx: &[usize]| {
            let mut len = 0.0;
            let mut cur = first;
            for &i in idx {
                len += cur.dist(rest[i]);
                cur = rest[i];
            }
            len
        };
        best = best.min(eval(&idx));
        let mut i = 0;
        while i < n {
            if c[i] < i {
                if i % 2 == 0 {
                    idx.swap(0, i);
                } else {
                    idx.swap(c[i], i);
                }
                best = best.min(eval(&idx));
                c[i] += 1;
                i = 0;
            } else {
                c[i] = 0;
                i += 1;
            }
        }
        best
    }

    #[test]
    fn three_by_three_serpentine() {
        let path = shortest_hamilton_path(&lattice(3, 10.0), Point2::ORIGIN);
        assert_eq!(path[0], Point2::ORIGIN);
        assert_eq!(path[1], Point2::new(10.0, 0.0));
        assert!((polyline_length(&path) - 80.0).abs() < 1e-9);
    }

    #[test]
    fn full_lattices_meet_bound() {
        for k in 1..=20 {
            let path = shortest_hamilton_path(&lattice(k, 2.5), Point2::ORIGIN);
            assert_eq!(path.len(), k * k);
            assert!((polyline_length(&path) - (k * k - 1) as f64 * 2.5).abs() < 1e-9);
        }
    }

    #[test]
    fn single_point() {
        let p = [Point2::new(3.0, 4.0)];
        assert_eq!(shortest_hamilton_path(&p, Point2::ORIGIN), p.to_vec());
    }

    #[test]
    fn near_optimal_on_small_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let (mut exact, mut worst) = (0, 1.0f64);
        for _ in 0..100 {
            let n = rng.random_range(4..=9);
            let pts: Vec<Point2> = (0..n).map(|_| Point2::new(rng.random_range(0.0..50.0), rng.random_range(0.0..50.0))).collect();
            let path = shortest_hamilton_path(&pts, Point2::ORIGIN);
            let opt = exhaustive(&pts, path[0]);
            let got = polyline_length(&path);
            if got <= opt + 1e-9 {
                exact += 1;
            }
            worst = worst.max(got / opt);
        }
        assert!(exact >= 90, "{exact}/100 optimal");
        assert!(worst <= 1.1, "worst ratio {worst}");
    }

    #[test]
    fn visits_each_once_without_crossings() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..20 {
            let pts: Vec<Point2> = (0..40).map(|_| Point2::new(rng.random_range(0.0..100.0), rng.random_range(0.0..100.0))).collect();
            let path = shortest_hamilton_path(&pts, Point2::ORIGIN);
            let mut a: Vec<(u64, u64)> = pts.iter().map(|p| (p.x.to_bits(), p.y.to_bits())).collect();
            let mut b: Vec<(u64, u64)> = path.iter().map(|p| (p.x.to_bits(), p.y.to_bits())).collect();
            a.sort();
            b.sort();
            assert_eq!(a, b);
            let nn = nearest_neighbor(&pts, pts.iter().position(|p| *p == path[0]).unwrap());
            assert!(polyline_length(&path) <= polyline_length(&nn) + 1e-9);
            for i in 0..path.len() - 1 {
                for j in i + 2..path.len() - 1 {
                    assert!(!segments_intersect(path[i], path[i + 1], path[j], path[j + 1]), "crossing");
                }
            }
        }
    }
}
