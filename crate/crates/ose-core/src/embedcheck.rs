//! The subspace-embedding predicate and Monte Carlo failure estimation.
//!
//! For an isometry U, "(1-ε)‖x‖ ≤ ‖Πx‖ ≤ (1+ε)‖x‖ for all x in col(U)" holds
//! iff every eigenvalue of (ΠU)ᵀ(ΠU) lies in [(1-ε)², (1+ε)²], so the check
//! is exact via `gram_eigen_bounds` rather than sampled directions.

use crate::error::{Error, Result};
use crate::hardinstances::{
    materialize_u, sample_d_beta, sample_mixture_general, sample_mixture_s1, HardInstance,
};
use crate::rng::{rng_from, DOMAIN_TRIAL};
use crate::sparsemat::{apply_sketch, gram_eigen_bounds, SketchMatrix};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Extreme singular values of ΠU and the pass/fail verdict at level ε.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DistortionReport {
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// max(1 - √λmin, √λmax - 1): the smallest ε at which the check passes.
    pub eps_effective: f64,
    pub pass: bool,
}

impl DistortionReport {
    pub fn from_eigen_bounds(lambda_min: f64, lambda_max: f64, eps: f64) -> Self {
        let lo = lambda_min.max(0.0).sqrt();
        let hi = lambda_max.max(0.0).sqrt();
        let eps_effective = (1.0 - lo).max(hi - 1.0);
        let pass = lo >= 1.0 - eps && hi <= 1.0 + eps;
        DistortionReport { lambda_min, lambda_max, eps_effective, pass }
    }
}

/// Exact distortion of Π on the subspace spanned by the instance's U.
pub fn check_embedding(
    pi: &SketchMatrix,
    inst: &HardInstance,
    eps: f64,
) -> Result<DistortionReport> {
    if pi.cols() != inst.n() {
        return Err(Error::DimensionMismatch(format!(
            "sketch has {} columns, instance lives in dimension {}",
            pi.cols(),
            inst.n()
        )));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "eps must lie in (0, 1), got {eps}"
        )));
    }
    let pu = apply_sketch(pi, &materialize_u(inst))?;
    let (lo, hi) = gram_eigen_bounds(&pu)?;
    Ok(DistortionReport::from_eigen_bounds(lo, hi, eps))
}

/// Monte Carlo estimate of a failure probability with a 95% Wilson interval.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FailureEstimate {
    pub trials: u64,
    pub failures: u64,
    pub p_hat: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
}

impl FailureEstimate {
    pub fn from_counts(failures: u64, trials: u64) -> Self {
        let (wilson_low, wilson_high) = wilson_interval(failures, trials);
        FailureEstimate {
            trials,
            failures,
            p_hat: failures as f64 / trials as f64,
            wilson_low,
            wilson_high,
        }
    }
}

/// 95% Wilson score interval for a binomial proportion.
///
/// The interval always contains the point estimate; at the boundary counts
/// (0 or all failures) the exact endpoints coincide with it, so the computed
/// ends are clamped onto it to absorb roundoff.
pub fn wilson_interval(failures: u64, trials: u64) -> (f64, f64) {
    assert!(trials >= 1, "wilson interval needs at least one trial");
    let z = 1.959963984540054_f64;
    let n = trials as f64;
    let p = failures as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = (z / denom) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0).min(p), (center + half).min(1.0).max(p))
}

/// The hard distribution a failure estimate draws from. `r` is the fixed
/// block size for plain D_β; the mixtures derive their branch sizes from ε.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum HardFamily {
    DBeta { r: usize },
    MixS1,
    MixGeneral,
}

impl HardFamily {
    /// Short token for CSV output.
    pub fn csv_token(&self) -> String {
        match self {
            HardFamily::DBeta { r } => r.to_string(),
            HardFamily::MixS1 => "mix_s1".to_string(),
            HardFamily::MixGeneral => "mix_general".to_string(),
        }
    }

    /// Checks that every branch of the family fits in ambient dimension n.
    pub fn check_feasible(&self, n: usize, d: usize, eps: f64) -> Result<()> {
        match *self {
            HardFamily::DBeta { r } => {
                if r == 0 || !r.is_power_of_two() {
                    return Err(Error::InvalidParameter(format!(
                        "r must be a power of two, got {r}"
                    )));
                }
                if d * r > n {
                    return Err(Error::Infeasible(format!("d*r = {} > n = {n}", d * r)));
                }
            }
            HardFamily::MixS1 => {
                let b = crate::constructions::hadamard_block_order(eps)?;
                if d * b > n {
                    return Err(Error::Infeasible(format!("d/(8 eps) = {} > n = {n}", d * b)));
                }
            }
            HardFamily::MixGeneral => {
                let l = crate::hardinstances::general_ladder_depth(eps)?;
                if d * (1 << l) > n {
                    return Err(Error::Infeasible(format!(
                        "d*2^L = {} > n = {n}",
                        d * (1usize << l)
                    )));
                }
            }
        }
        Ok(())
    }

    /// Draws one instance.
    pub fn sample(&self, n: usize, d: usize, eps: f64, seed: u64) -> Result<HardInstance> {
        match *self {
            HardFamily::DBeta { r } => sample_d_beta(n, d, r, seed),
            HardFamily::MixS1 => sample_mixture_s1(n, d, eps, seed).map(|(inst, _)| inst),
            HardFamily::MixGeneral => {
                sample_mixture_general(n, d, eps, seed).map(|(inst, _)| inst)
            }
        }
    }
}

/// Estimates Pr[Π fails to embed U] for U drawn from `family` on a fixed Π.
///
/// Trial t draws its instance from a stream keyed by (seed, t), so the count
/// is reproducible regardless of thread count or evaluation order.
pub fn estimate_failure_prob(
    pi: &SketchMatrix,
    family: HardFamily,
    d: usize,
    eps: f64,
    trials: u64,
    seed: u64,
) -> Result<FailureEstimate> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    let n = pi.cols();
    family.check_feasible(n, d, eps)?;
    let failures = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng_from(seed, &[DOMAIN_TRIAL, t]);
            let inst_seed = rng.random::<u64>();
            let inst = family
                .sample(n, d, eps, inst_seed)
                .expect("feasibility checked upfront");
            let report = check_embedding(pi, &inst, eps).expect("dimensions checked upfront");
            u64::from(!report.pass)
        })
        .sum();
    Ok(FailureEstimate::from_counts(failures, trials))
}

/// Fraction of Π's columns with ℓ2-norm in [1-ε, 1+ε].
pub fn column_norm_fraction(pi: &SketchMatrix, eps: f64) -> f64 {
    let hits = (0..pi.cols())
        .filter(|&c| {
            let norm = pi.column_norm(c);
            norm >= 1.0 - eps && norm <= 1.0 + eps
        })
        .count();
    hits as f64 / pi.cols() as f64
}

/// Per-row counts of instance selectors landing through an entry of absolute
/// value in [1-ε, 1+ε], for column sparsity s = 1. A bucket with count > 1 is
/// a collision.
pub fn bucket_collision_stats(
    pi: &SketchMatrix,
    inst: &HardInstance,
    eps: f64,
) -> Result<(Vec<u64>, bool)> {
    if pi.max_col_nnz() != 1 {
        return Err(Error::NotApplicable(format!(
            "bucket statistics are defined for s = 1, sketch has s = {}",
            pi.max_col_nnz()
        )));
    }
    if pi.cols() != inst.n() {
        return Err(Error::DimensionMismatch(format!(
            "sketch has {} columns, instance lives in dimension {}",
            pi.cols(),
            inst.n()
        )));
    }
    let mut counts = vec![0u64; pi.rows()];
    for &c in inst.selectors() {
        if let Some(&(row, v)) = pi.column(c).first() {
            if v.abs() >= 1.0 - eps && v.abs() <= 1.0 + eps {
                counts[row] += 1;
            }
        }
    }
    let has_collision = counts.iter().any(|&c| c > 1);
    Ok((counts, has_collision))
}
