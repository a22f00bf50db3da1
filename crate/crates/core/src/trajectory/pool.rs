use serde::{Deserialize, Serialize};

use super::mcd::{fuse_mcd, mcd_subset_size};
use crate::error::{Error, Result};
use crate::geometry::{ApId, Offset};

/// Pools trigger pruning above this many members.
pub const PRUNE_ABOVE: usize = 10;

/// Identifies overlapping observations: ordered AP pair plus the 45-degree
/// heading bin at the start mark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PoolKey {
    pub ap_a: ApId,
    pub ap_b: ApId,
    pub signature: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoolMember {
    pub offset: Offset,
    pub path_length: f64,
    pub t_start: f64,
    pub t_end: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionPool {
    pub key: PoolKey,
    pub members: Vec<PoolMember>,
    pub fused: Option<Offset>,
    /// Compound offset after each fusion, oldest first.
    pub history: Vec<Offset>,
    /// `(t_start, t_end)` of members dropped by pruning.
    pub discarded: Vec<(f64, f64)>,
    /// Time of the most recent fusion.
    pub last_fused: f64,
}

impl FusionPool {
    pub fn new(key: PoolKey) -> Self {
        FusionPool { key, members: Vec::new(), fused: None, history: Vec::new(), discarded: Vec::new(), last_fused: 0.0 }
    }

    pub fn iteration(&self) -> usize {
        self.history.len()
    }

    pub fn mean_path_length(&self) -> f64 {
        if self.members.is_empty() {
            return f64::INFINITY;
        }
        self.members.iter().map(|m| m.path_length).sum::<f64>() / self.members.len() as f64
    }

    /// Adds an observation, re-fuses and prunes.
    pub fn add(&mut self, member: PoolMember) -> Result<()> {
        if !member.offset.is_finite() {
            return Err(Error::invalid("pool member", "non-finite offset"));
        }
        self.members.push(member);
        let fused = if self.members.len() == 1 {
            member.offset
        } else {
            let offsets: Vec<Offset> = self.members.iter().map(|m| m.offset).collect();
            fuse_mcd(&offsets)?.location
        };
        self.fused = Some(fused);
        self.history.push(fused);
        self.last_fused = member.t_end;
        *self = prune_pool(std::mem::replace(self, FusionPool::new(self.key)))?;
        Ok(())
    }
}

/// Above [`PRUNE_ABOVE`] members keeps only the MCD-selected subset and
/// records the time spans of the dropped ones.
pub fn prune_pool(mut pool: FusionPool) -> Result<FusionPool> {
    let n = pool.members.len();
    if n <= PRUNE_ABOVE {
        return Ok(pool);
    }
    let offsets: Vec<Offset> = pool.members.iter().map(|m| m.offset).collect();
    let fit = fuse_mcd(&offsets)?;
    debug_assert_eq!(fit.selected.len(), mcd_subset_size(n, 2));
    let mut keep = vec![false; n];
    for &i in &fit.selected {
        keep[i] = true;
    }
    let (kept, dropped): (Vec<_>, Vec<_>) = pool.members.iter().zip(keep).partition(|(_, k)| *k);
    pool.discarded.extend(dropped.iter().map(|(m, _)| (m.t_start, m.t_end)));
    pool.members = kept.into_iter().map(|(m, _)| *m).collect();
    pool.fused = Some(fit.location);
    Ok(pool)
}

pub fn fusion_converged(pool: &FusionPool, theta: f64) -> Result<bool> {
    match pool.history.as_slice() {
        [.., prev, last] => Ok(last.dist(*prev) < theta),
        _ => Err(Error::TooFewIterations(pool.history.len())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point2;

    fn key() -> PoolKey {
        PoolKey { ap_a: ApId(1), ap_b: ApId(2), signature: 0 }
    }

    fn member(x: f64, y: f64, t: f64) -> PoolMember {
        PoolMember { offset: Point2::new(x, y), path_length: 1.0, t_start: t, t_end: t + 1.0 }
    }

    fn pool_of(n: usize) -> FusionPool {
        let mut p = FusionPool::new(key());
        p.members = (0..n).map(|i| member(5.0 + 0.01 * (i * i % 7) as f64, 0.01 * (i % 3) as f64, i as f64)).collect();
        p
    }

    #[test]
    fn ten_members_untouched() {
        let p = pool_of(10);
        assert_eq!(prune_pool(p.clone()).unwrap(), p);
    }

    #[test]
    fn eleven_members_keep_seven() {
        let p = prune_pool(pool_of(11)).unwrap();
        assert_eq!(p.members.len(), 7);
        assert_eq!(p.discarded.len(), 4);
        let kept: Vec<f64> = p.members.iter().map(|m| m.t_start).collect();
        for (t0, _) in &p.discarded {
            assert!(!kept.contains(t0));
        }
    }

    #[test]
    fn add_keeps_pool_bounded() {
        let mut p = FusionPool::new(key());
        for i in 0..40 {
            p.add(member(3.0 + 0.1 * (i % 5) as f64, 1.0, i as f64)).unwrap();
            assert!(p.members.len() <= PRUNE_ABOVE);
            assert!(p.fused.unwrap().is_finite());
        }
        assert_eq!(p.iteration(), 40);
    }

    #[test]
    fn convergence_examples() {
        let mut p = FusionPool::new(key());
        assert!(matches!(fusion_converged(&p, 1.0), Err(Error::TooFewIterations(0))));
        p.history = vec![Point2::new(0.0, 0.0), Point2::new(0.0, 0.0)];
        assert!(fusion_converged(&p, 1e-9).unwrap());
        p.history = vec![Point2::new(0.0, 0.0), Point2::new(0.5, 0.0)];
        assert!(fusion_converged(&p, 1.0).unwrap());
        p.history = vec![Point2::new(0.0, 0.0), Point2::new(2.0, 0.0)];
        assert!(!fusion_converged(&p, 1.0).unwrap());
    }
}
