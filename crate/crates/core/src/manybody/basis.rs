//! Occupation-number basis of the bosonic sector of N particles on M sites.
//!
//! States are weak compositions (n_1, ..., n_M) of N, enumerated in
//! lexicographic order. Ranking uses the usual combinatorial counting so a
//! matrix-free operator can locate the image of a hop in O(M·N).

use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BasisError {
    #[error("basis dimension {0} exceeds the configured guard {1}")]
    TooLarge(u64, u64),
    #[error("need at least 2 sites, got {0}")]
    TooFewSites(usize),
}

/// Default cap on the symmetric-sector dimension.
pub const DIMENSION_GUARD: u64 = 200_000;

#[derive(Debug)]
pub struct OccupationBasis {
    particles: usize,
    sites: usize,
    /// Flattened occupation tuples, stride = sites.
    states: Vec<u8>,
    dim: usize,
}

/// Number of weak compositions of `n` into `parts` parts, i.e.
/// C(n + parts - 1, n), as u64.
fn compositions(parts: usize, n: usize) -> u64 {
    if parts == 0 {
        return if n == 0 { 1 } else { 0 };
    }
    let k = (parts - 1).min(n);
    let top = n + parts - 1;
    let mut acc: u128 = 1;
    for i in 0..k {
        // exact: acc always holds C(top-?, i) style prefix products
        acc = acc * (top - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

impl OccupationBasis {
    pub fn new(particles: usize, sites: usize) -> Result<Arc<Self>, BasisError> {
        Self::with_guard(particles, sites, DIMENSION_GUARD)
    }

    pub fn with_guard(particles: usize, sites: usize, guard: u64) -> Result<Arc<Self>, BasisError> {
        if sites < 2 {
            return Err(BasisError::TooFewSites(sites));
        }
        let dim = compositions(sites, particles);
        if dim > guard {
            return Err(BasisError::TooLarge(dim, guard));
        }
        let dim = dim as usize;
        let mut states = Vec::with_capacity(dim * sites);
        let mut current = vec![0u8; sites];
        enumerate(&mut current, 0, particles, &mut states);
        debug_assert_eq!(states.len(), dim * sites);
        Ok(Arc::new(OccupationBasis {
            particles,
            sites,
            states,
            dim,
        }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn occupation(&self, rank: usize) -> &[u8] {
        &self.states[rank * self.sites..(rank + 1) * self.sites]
    }

    /// Lexicographic rank of an occupation tuple.
    pub fn rank(&self, occ: &[u8]) -> usize {
        debug_assert_eq!(occ.len(), self.sites);
        let mut rank: u64 = 0;
        let mut remaining = self.particles;
        for i in 0..self.sites - 1 {
            let ni = occ[i] as usize;
            for c in 0..ni {
                rank += compositions(self.sites - i - 1, remaining - c);
            }
            remaining -= ni;
        }
        rank as usize
    }
}

fn enumerate(current: &mut [u8], pos: usize, left: usize, out: &mut Vec<u8>) {
    if pos == current.len() - 1 {
        current[pos] = left as u8;
        out.extend_from_slice(current);
        return;
    }
    for c in 0..=left {
        current[pos] = c as u8;
        enumerate(current, pos + 1, left - c, out);
    }
}

/// N!/Π n_i! as f64 (fits comfortably at desk scale).
pub fn multinomial(occ: &[u8]) -> f64 {
    let n: usize = occ.iter().map(|&x| x as usize).sum();
    let mut val = 1.0f64;
    let mut used = 0usize;
    for &c in occ {
        // multiply C(used + c, c) step by step
        for i in 1..=(c as usize) {
            val = val * (used + i) as f64 / i as f64;
        }
        used += c as usize;
    }
    debug_assert_eq!(used, n);
    val
}
