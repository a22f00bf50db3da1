use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Offset, Point2};

/// Largest pool solved by exhaustive subset enumeration.
pub const EXACT_MAX_N: usize = 12;

pub fn mcd_subset_size(n: usize, d: usize) -> usize {
    (n + d + 1) / 2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McdFit {
    pub location: Offset,
    /// Indices into the input, ascending.
    pub selected: Vec<usize>,
    /// Determinant of the selected subset's sample covariance.
    pub determinant: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CStepConfig {
    pub starts: usize,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for CStepConfig {
    fn default() -> Self {
        CStepConfig { starts: 20, max_iterations: 50, seed: 0x6d63_64 }
    }
}

struct Moments {
    mean: Point2,
    sxx: f64,
    syy: f64,
    sxy: f64,
}

impl Moments {
    fn of(points: &[Offset], idx: &[usize]) -> Moments {
        let n = idx.len() as f64;
        let mean = idx.iter().fold(Point2::ORIGIN, |acc, &i| acc + points[i]) * (1.0 / n);
        let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
        for &i in idx {
            let d = points[i] - mean;
            sxx += d.x * d.x;
            syy += d.y * d.y;
            sxy += d.x * d.y;
        }
        let k = 1.0 / (n - 1.0).max(1.0);
        Moments { mean, sxx: sxx * k, syy: syy * k, sxy: sxy * k }
    }

    fn det(&self) -> f64 {
        (self.sxx * self.syy - self.sxy * self.sxy).max(0.0)
    }

    fn trace(&self) -> f64 {
        self.sxx + self.syy
    }

    fn mahalanobis2(&self, p: Point2) -> f64 {
        let d = p - self.mean;
        let det = self.det();
        (self.syy * d.x * d.x - 2.0 * self.sxy * d.x * d.y + self.sxx * d.y * d.y) / det
    }
}

fn check(points: &[Offset]) -> Result<()> {
    if points.len() < 2 {
        return Err(Error::invalid("pool members", "need at least two"));
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(Error::invalid("pool members", "non-finite offset"));
    }
    Ok(())
}

/// Minimum covariance determinant fit of planar offsets.
///
/// Pools of up to [`EXACT_MAX_N`] members are solved by enumerating every
/// h-subset; larger pools use concentration steps. Ties on the determinant
/// go to the smaller covariance trace, then to the lexicographically first
/// subset.
pub fn fuse_mcd(points: &[Offset]) -> Result<McdFit> {
    check(points)?;
    if points.len() <= EXACT_MAX_N {
        Ok(fuse_exact(points))
    } else {
        Ok(fuse_csteps(points, &CStepConfig::default()))
    }
}

fn better(a: (f64, f64), b: (f64, f64)) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1 < b.1)
}

fn fit_of(points: &[Offset], idx: Vec<usize>) -> McdFit {
    let m = Moments::of(points, &idx);
    McdFit { location: m.mean, determinant: m.det(), selected: idx }
}

fn fuse_exact(points: &[Offset]) -> McdFit {
    let n = points.len();
    let h = mcd_subset_size(n, 2).min(n);
    let mut idx: Vec<usize> = (0..h).collect();
    let mut best: Option<(f64, f64, Vec<usize>)> = None;
    loop {
        let m = Moments::of(points, &idx);
        let score = (m.det(), m.trace());
        if best.as_ref().is_none_or(|b| better(score, (b.0, b.1))) {
            best = Some((score.0, score.1, idx.clone()));
        }
        // next combination in lexicographic order
        let Some(i) = (0..h).rev().find(|&i| idx[i] < n - h + i) else { break };
        idx[i] += 1;
        for j in i + 1..h {
            idx[j] = idx[j - 1] + 1;
        }
    }
    fit_of(points, best.expect("at least one subset").2)
}

/// Concentration-step MCD from neighborhood starts plus seeded random
/// starts, each polished by pairwise exchange.
pub fn fuse_csteps(points: &[Offset], cfg: &CStepConfig) -> McdFit {
    let n = points.len();
    let h = mcd_subset_size(n, 2).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best: Option<(f64, f64, Vec<usize>)> = None;
    // each member's h nearest neighbors, then random elemental subsets
    let local: Vec<Vec<usize>> = (0..n).map(|i| nearest_euclidean(points, points[i], h)).collect();
    let total = n + cfg.starts.max(1);
    for s in 0..total {
        let mut idx = if s < n { local[s].clone() } else { sample(&mut rng, n, 3.min(n)).into_vec() };
        // grow a singular start until it spans the plane
        let mut extra = sample(&mut rng, n, n).into_vec().into_iter();
        while Moments::of(points, &idx).det() == 0.0 && idx.len() < h {
            match extra.next() {
                Some(i) if !idx.contains(&i) => idx.push(i),
                Some(_) => {}
                None => break,
            }
        }
        let mut m = Moments::of(points, &idx);
        let mut score = (f64::INFINITY, f64::INFINITY);
        for _ in 0..cfg.max_iterations {
            if m.det() == 0.0 {
                if idx.len() < h {
                    idx = nearest_euclidean(points, m.mean, h);
                    m = Moments::of(points, &idx);
                }
                break;
            }
            let mut order: Vec<(f64, usize)> = points.iter().enumerate().map(|(i, &p)| (m.mahalanobis2(p), i)).collect();
            order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let mut next: Vec<usize> = order[..h].iter().map(|&(_, i)| i).collect();
            next.sort_unstable();
            let nm = Moments::of(points, &next);
            let ns = (nm.det(), nm.trace());
            let done = next == idx || !better(ns, score);
            idx = next;
            m = nm;
            score = ns;
            if done {
                break;
            }
        }
        if idx.len() == h {
            idx = swap_refine(points, idx, cfg.max_iterations);
            m = Moments::of(points, &idx);
        }
        idx.sort_unstable();
        let s = (m.det(), m.trace());
        if idx.len() == h && best.as_ref().is_none_or(|b| better(s, (b.0, b.1))) {
            best = Some((s.0, s.1, idx));
        }
    }
    let idx = best.map(|b| b.2).unwrap_or_else(|| {
        let center = points.iter().fold(Point2::ORIGIN, |a, &p| a + p) * (1.0 / n as f64);
        nearest_euclidean(points, center, h)
    });
    fit_of(points, idx)
}

/// Pairwise exchange: swaps one selected and one unselected member while
/// that lowers the determinant. Escapes C-step fixed points that are not
/// optimal.
fn swap_refine(points: &[Offset], mut idx: Vec<usize>, max_rounds: usize) -> Vec<usize> {
    let n = points.len();
    let m = Moments::of(points, &idx);
    let mut score = (m.det(), m.trace());
    for _ in 0..max_rounds {
        let mut best: Option<((f64, f64), usize, usize)> = None;
        for slot in 0..idx.len() {
            for j in (0..n).filter(|j| !idx.contains(j)) {
                let mut trial = idx.clone();
                trial[slot] = j;
                let tm = Moments::of(points, &trial);
                let ts = (tm.det(), tm.trace());
                if better(ts, best.map_or(score, |b| b.0)) {
                    best = Some((ts, slot, j));
                }
            }
        }
        let Some((s, slot, j)) = best else { break };
        idx[slot] = j;
        score = s;
    }
    idx
}

fn nearest_euclidean(points: &[Offset], c: Point2, h: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].dist(c).total_cmp(&points[b].dist(c)).then(a.cmp(&b)));
    let mut idx = order[..h].to_vec();
    idx.sort_unstable();
    idx
}
