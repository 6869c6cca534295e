//! Samplers for the hard-instance family D_β and its two mixtures.
//!
//! A sample from D_β is an n×d matrix U = VW: V selects d·r distinct canonical
//! basis vectors of ℝⁿ (r = 1/β), W groups them into d blocks of r rows with
//! Rademacher signs scaled by √β = 1/√r. Selectors are drawn without
//! replacement, which removes the degenerate identical-column event while
//! keeping every selector marginally uniform on [0, n); the materialized U is
//! then an exact isometry.

use crate::error::{Error, Result};
use crate::rng::{rademacher, rng_from, sample_distinct, DOMAIN_DBETA, DOMAIN_MIXTURE};
use crate::sparsemat::SparseVec;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

/// One draw from D_β, encoded by selector indices and Rademacher signs.
///
/// Column i of the implied U has nonzeros σ_j/√r at rows C_j for j in block i
/// (blocks are consecutive runs of r selector positions).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HardInstance {
    n: usize,
    d: usize,
    r: usize,
    selectors: Vec<usize>,
    signs: Vec<i8>,
}

impl HardInstance {
    pub fn new(n: usize, d: usize, r: usize, selectors: Vec<usize>, signs: Vec<i8>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter("d must be positive".into()));
        }
        if r == 0 || !r.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "r must be a power of two, got {r}"
            )));
        }
        let k = d
            .checked_mul(r)
            .ok_or_else(|| Error::InvalidParameter("d*r overflows".into()))?;
        if k > n {
            return Err(Error::Infeasible(format!(
                "d*r = {k} selectors exceed n = {n}"
            )));
        }
        if selectors.len() != k || signs.len() != k {
            return Err(Error::DimensionMismatch(format!(
                "expected {k} selectors and signs, got {} and {}",
                selectors.len(),
                signs.len()
            )));
        }
        if selectors.iter().any(|&c| c >= n) {
            return Err(Error::DimensionMismatch("selector out of range".into()));
        }
        let distinct: HashSet<_> = selectors.iter().collect();
        if distinct.len() != k {
            return Err(Error::InvalidParameter("selectors must be distinct".into()));
        }
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidParameter("signs must be +-1".into()));
        }
        Ok(Self { n, d, r, selectors, signs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn selectors(&self) -> &[usize] {
        &self.selectors
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    /// Block (column of U) owning selector position `j`.
    pub fn block_of(&self, j: usize) -> usize {
        j / self.r
    }

    /// Position of column `col` of Π among the selectors, if chosen.
    pub fn selector_position(&self, col: usize) -> Option<usize> {
        self.selectors.iter().position(|&c| c == col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    DBeta,
    MixS1,
    MixGeneral,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Family::DBeta => "d_beta",
            Family::MixS1 => "mix_s1",
            Family::MixGeneral => "mix_general",
        };
        f.write_str(s)
    }
}

/// Which branch of a mixture produced an instance. `ell` records log2(r) for
/// mixture draws (0 for the D_1 branch) and is absent for plain D_β draws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureLabel {
    pub family: Family,
    pub beta: f64,
    pub ell: Option<u32>,
}

/// Draws U ~ D_{1/r}: d·r distinct uniform selectors with i.i.d. signs.
pub fn sample_d_beta(n: usize, d: usize, r: usize, seed: u64) -> Result<HardInstance> {
    if r == 0 || !r.is_power_of_two() {
        return Err(Error::InvalidParameter(format!(
            "r must be a power of two, got {r}"
        )));
    }
    let k = d
        .checked_mul(r)
        .ok_or_else(|| Error::InvalidParameter("d*r overflows".into()))?;
    if d == 0 || k > n {
        return Err(Error::Infeasible(format!(
            "cannot place d*r = {k} distinct selectors in [0, {n})"
        )));
    }
    let mut rng = rng_from(seed, &[DOMAIN_DBETA, n as u64, d as u64, r as u64]);
    let selectors = sample_distinct(&mut rng, n, k);
    let signs = (0..k)
        .map(|_| if rademacher(&mut rng) > 0.0 { 1i8 } else { -1i8 })
        .collect();
    HardInstance::new(n, d, r, selectors, signs)
}

/// The s=1 hard mixture: D_1 with probability 1/2, D_{8ε} with probability 1/2.
pub fn sample_mixture_s1(
    n: usize,
    d: usize,
    eps: f64,
    seed: u64,
) -> Result<(HardInstance, MixtureLabel)> {
    let b = crate::constructions::hadamard_block_order(eps)?; // 1/(8ε), power of two
    if d.saturating_mul(b) > n {
        return Err(Error::Infeasible(format!(
            "mixture needs d/(8*eps) = {} selectors, n = {n}",
            d * b
        )));
    }
    let mut coin = rng_from(seed, &[DOMAIN_MIXTURE, 1]);
    let heavy_branch = coin.random::<bool>();
    let (r, ell) = if heavy_branch {
        (b, b.trailing_zeros())
    } else {
        (1, 0)
    };
    let inst = sample_d_beta(n, d, r, seed)?;
    let label = MixtureLabel {
        family: Family::MixS1,
        beta: 1.0 / r as f64,
        ell: Some(ell),
    };
    Ok((inst, label))
}

/// Depth of the general mixture ladder, L = floor(log2(1/eps)) - 3.
pub fn general_ladder_depth(eps: f64) -> Result<u32> {
    if !(eps > 0.0 && eps < 1.0 / 16.0) {
        return Err(Error::InvalidParameter(format!(
            "general mixture requires eps in (0, 1/16), got {eps}"
        )));
    }
    let l = (1.0 / eps).log2().floor() as i64 - 3;
    if l < 1 {
        return Err(Error::InvalidParameter(format!(
            "ladder depth {l} < 1 for eps = {eps}"
        )));
    }
    Ok(l as u32)
}

/// The general hard mixture: D_1 with probability 1/2, otherwise D_{2^-ℓ}
/// for ℓ uniform in {1, ..., L}.
pub fn sample_mixture_general(
    n: usize,
    d: usize,
    eps: f64,
    seed: u64,
) -> Result<(HardInstance, MixtureLabel)> {
    let l_max = general_ladder_depth(eps)?;
    if d.saturating_mul(1 << l_max) > n {
        return Err(Error::Infeasible(format!(
            "mixture needs up to d*2^L = {} selectors, n = {n}",
            d * (1 << l_max)
        )));
    }
    let mut coin = rng_from(seed, &[DOMAIN_MIXTURE, 2]);
    let (r, ell) = if coin.random::<bool>() {
        let ell = coin.random_range(1..=l_max);
        (1usize << ell, ell)
    } else {
        (1, 0)
    };
    let inst = sample_d_beta(n, d, r, seed)?;
    let label = MixtureLabel {
        family: Family::MixGeneral,
        beta: 1.0 / r as f64,
        ell: Some(ell),
    };
    Ok((inst, label))
}

/// Materializes the d sparse columns of U (rows sorted, values σ_j/√r).
pub fn materialize_u(inst: &HardInstance) -> Vec<SparseVec> {
    let scale = 1.0 / (inst.r() as f64).sqrt();
    (0..inst.d())
        .map(|i| {
            let mut entries: Vec<(usize, f64)> = (i * inst.r()..(i + 1) * inst.r())
                .map(|j| (inst.selectors()[j], inst.signs()[j] as f64 * scale))
                .collect();
            entries.sort_unstable_by_key(|&(row, _)| row);
            SparseVec::new(inst.n(), entries).expect("instance invariants guarantee a valid column")
        })
        .collect()
}
