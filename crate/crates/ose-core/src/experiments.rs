//! Threshold sweeps, scaling fits, and the desk-scale demonstrations.
//!
//! A sweep point fixes (d, ε, δ) and scans a grid of target dimensions m.
//! Each trial draws a fresh sketch AND a fresh instance (the embedding is a
//! random matrix), so e.g. Count-Sketch failure probabilities reduce to exact
//! birthday collisions. The empirical threshold m* is the smallest grid m
//! whose Wilson upper bound drops below δ, and log-log fits of m* against
//! each swept axis expose the scaling exponents.
//!
//! Trials regenerate only the sketch columns the instance actually touches;
//! per-column seed streams make this bit-identical to materializing the full
//! matrix.

use crate::adversary::{find_colliding_pairs, shared_heavy_rows, PairFinding};
use crate::constructions::{ColumnSampler, ConstructionKind, ConstructionSpec};
use crate::embedcheck::{DistortionReport, FailureEstimate, HardFamily};
use crate::error::{Error, Result};
use crate::hardinstances::{general_ladder_depth, sample_d_beta, HardInstance};
use crate::rng::{rng_from, DOMAIN_SWEEP};
use crate::sparsemat::{gram_eigen_bounds, DenseMatrix, SketchMatrix};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Hard cap on auto-sized ambient dimension unless explicitly forced.
pub const MEMORY_GUARD_COLUMNS: usize = 10_000_000;

/// Grid of target dimensions, explicit or geometric.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MGrid {
    Explicit(Vec<usize>),
    Geometric { lo: usize, hi: usize, factor: f64 },
}

impl MGrid {
    pub fn expand(&self) -> Result<Vec<usize>> {
        let grid = match self {
            MGrid::Explicit(v) => v.clone(),
            MGrid::Geometric { lo, hi, factor } => {
                if *lo == 0 || hi < lo {
                    return Err(Error::InvalidParameter(format!(
                        "geometric grid needs 1 <= lo <= hi, got lo={lo} hi={hi}"
                    )));
                }
                if !factor.is_finite() || *factor <= 1.0 {
                    return Err(Error::InvalidParameter(format!(
                        "geometric grid factor must exceed 1, got {factor}"
                    )));
                }
                let mut out = Vec::new();
                let mut v = *lo as f64;
                while v.round() as usize <= *hi {
                    let m = v.round() as usize;
                    if out.last() != Some(&m) {
                        out.push(m);
                    }
                    v *= factor;
                }
                out
            }
        };
        if grid.is_empty() {
            return Err(Error::InvalidParameter("empty m grid".into()));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "m grid must be strictly increasing".into(),
            ));
        }
        Ok(grid)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub kind: ConstructionKind,
    /// Column sparsity for osnap (ignored otherwise).
    pub s: usize,
    pub d_list: Vec<usize>,
    pub eps_list: Vec<f64>,
    pub delta_list: Vec<f64>,
    pub m_grid: MGrid,
    pub trials_per_point: u64,
    pub family: HardFamily,
    pub seed: u64,
    /// Optional cap on the auto-sized ambient dimension n.
    pub n_cap: Option<usize>,
    /// Permits n beyond the memory guard.
    pub force_large_n: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub d: usize,
    pub eps: f64,
    pub delta: f64,
    pub m: usize,
    pub n: usize,
    pub estimate: FailureEstimate,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThresholdPoint {
    pub d: usize,
    pub eps: f64,
    pub delta: f64,
    /// Smallest grid m whose Wilson upper bound is at most delta; None when
    /// no grid point attains it.
    pub m_star: Option<usize>,
}

/// Log-log OLS fit of m* against one swept axis.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AxisFit {
    pub exponent: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Fitted exponents of m* ∝ d^a · eps^b · delta^c along whichever axes have
/// at least three attained thresholds.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct SweepFit {
    pub exponent_d: Option<AxisFit>,
    pub exponent_eps: Option<AxisFit>,
    pub exponent_delta: Option<AxisFit>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub thresholds: Vec<ThresholdPoint>,
    pub fit: SweepFit,
}

/// Ambient dimension for one sweep point: n = ⌈8 d² max(1, 1/(ε²δ))⌉, capped.
pub fn auto_ambient_dimension(
    d: usize,
    eps: f64,
    delta: f64,
    n_cap: Option<usize>,
    force_large_n: bool,
) -> Result<usize> {
    if !(eps > 0.0 && eps < 1.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "eps and delta must lie in (0, 1), got eps={eps} delta={delta}"
        )));
    }
    let raw = (8.0 * (d * d) as f64 * (1.0f64).max(1.0 / (eps * eps * delta))).ceil() as usize;
    let n = raw.min(n_cap.unwrap_or(usize::MAX));
    if n > MEMORY_GUARD_COLUMNS && !force_large_n {
        return Err(Error::Infeasible(format!(
            "ambient dimension n = {n} exceeds the {MEMORY_GUARD_COLUMNS}-column guard; \
             set force_large_n to proceed"
        )));
    }
    Ok(n)
}

/// Failure estimate with a fresh sketch and fresh instance per trial.
///
/// Trial t derives its streams from (seed, d, m, t); only the selector
/// columns of the fresh sketch are generated.
#[allow(clippy::too_many_arguments)]
pub fn estimate_failure_fresh(
    kind: ConstructionKind,
    s: usize,
    m: usize,
    n: usize,
    family: HardFamily,
    d: usize,
    eps: f64,
    check_eps: f64,
    trials: u64,
    seed: u64,
) -> Result<FailureEstimate> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    family.check_feasible(n, d, eps)?;
    // validate the construction once before fanning out
    ConstructionSpec { kind, m, n, s, eps, seed: 0 }.validate()?;
    let failures = (0..trials)
        .into_par_iter()
        .map(|t| {
            let report = fresh_trial(kind, s, m, n, family, d, eps, check_eps, seed, t)
                .expect("parameters validated upfront");
            u64::from(!report.pass)
        })
        .sum();
    Ok(FailureEstimate::from_counts(failures, trials))
}

#[allow(clippy::too_many_arguments)]
fn fresh_trial(
    kind: ConstructionKind,
    s: usize,
    m: usize,
    n: usize,
    family: HardFamily,
    d: usize,
    eps: f64,
    check_eps: f64,
    seed: u64,
    trial: u64,
) -> Result<DistortionReport> {
    let mut trng = rng_from(seed, &[DOMAIN_SWEEP, d as u64, m as u64, trial]);
    let pi_seed = trng.random::<u64>();
    let inst_seed = trng.random::<u64>();
    let sampler = ColumnSampler::new(ConstructionSpec { kind, m, n, s, eps, seed: pi_seed })?;
    let inst = family.sample(n, d, eps, inst_seed)?;
    let pu = sketch_times_instance(&sampler, &inst);
    let (lo, hi) = gram_eigen_bounds(&pu)?;
    Ok(DistortionReport::from_eigen_bounds(lo, hi, check_eps))
}

/// ΠU for a lazily sampled sketch: accumulates only the selector columns.
fn sketch_times_instance(sampler: &ColumnSampler, inst: &HardInstance) -> DenseMatrix {
    let m = sampler.spec().m;
    let r = inst.r();
    let scale = 1.0 / (r as f64).sqrt();
    let mut pu = DenseMatrix::zeros(m, inst.d());
    for (j, (&sel, &sgn)) in inst.selectors().iter().zip(inst.signs()).enumerate() {
        let block = j / r;
        let w = sgn as f64 * scale;
        for (row, v) in sampler.column(sel) {
            let cur = pu.get(row, block);
            pu.set(row, block, cur + w * v);
        }
    }
    pu
}

fn ols_loglog(points: &[(f64, f64)]) -> Option<AxisFit> {
    if points.len() < 3 {
        return None;
    }
    let logged: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let k = logged.len() as f64;
    let mean_x = logged.iter().map(|p| p.0).sum::<f64>() / k;
    let mean_y = logged.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = logged.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = logged
        .iter()
        .map(|p| (p.0 - mean_x) * (p.1 - mean_y))
        .sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_tot: f64 = logged.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let ss_res: f64 = logged
        .iter()
        .map(|p| (p.1 - (intercept + slope * p.0)).powi(2))
        .sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Some(AxisFit { exponent: slope, r_squared, points: points.len() })
}

/// Runs the full grid and fits the scaling exponents.
pub fn threshold_sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    if cfg.trials_per_point < 100 {
        return Err(Error::InvalidParameter(format!(
            "trials_per_point must be at least 100, got {}",
            cfg.trials_per_point
        )));
    }
    if cfg.d_list.is_empty() || cfg.eps_list.is_empty() || cfg.delta_list.is_empty() {
        return Err(Error::InvalidParameter("empty sweep axis".into()));
    }
    let grid = cfg.m_grid.expand()?;
    let mut rows = Vec::new();
    let mut thresholds = Vec::new();
    for &d in &cfg.d_list {
        for &eps in &cfg.eps_list {
            for &delta in &cfg.delta_list {
                let n =
                    auto_ambient_dimension(d, eps, delta, cfg.n_cap, cfg.force_large_n)?;
                let mut m_star = None;
                for &m in &grid {
                    let estimate = estimate_failure_fresh(
                        cfg.kind,
                        cfg.s,
                        m,
                        n,
                        cfg.family,
                        d,
                        eps,
                        eps,
                        cfg.trials_per_point,
                        cfg.seed,
                    )?;
                    if m_star.is_none() && estimate.wilson_high <= delta {
                        m_star = Some(m);
                    }
                    rows.push(SweepRow { d, eps, delta, m, n, estimate });
                }
                thresholds.push(ThresholdPoint { d, eps, delta, m_star });
            }
        }
    }

    let attained = |pred: &dyn Fn(&ThresholdPoint) -> bool, x: &dyn Fn(&ThresholdPoint) -> f64| {
        thresholds
            .iter()
            .filter(|t| pred(t) && t.m_star.is_some())
            .map(|t| (x(t), t.m_star.unwrap() as f64))
            .collect::<Vec<_>>()
    };
    let (e0, dl0, d0) = (cfg.eps_list[0], cfg.delta_list[0], cfg.d_list[0]);
    let fit = SweepFit {
        exponent_d: ols_loglog(&attained(
            &|t| t.eps == e0 && t.delta == dl0,
            &|t| t.d as f64,
        )),
        exponent_eps: ols_loglog(&attained(&|t| t.d == d0 && t.delta == dl0, &|t| t.eps)),
        exponent_delta: ols_loglog(&attained(&|t| t.d == d0 && t.eps == e0, &|t| t.delta)),
    };
    Ok(SweepResult { rows, thresholds, fit })
}

/// Result of the block-Hadamard zero-distortion demonstration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DemoReport {
    pub estimate: FailureEstimate,
    /// Largest eps_effective seen on passing trials.
    pub max_eps_effective: f64,
    /// Exact probability that two selectors hit identical concatenated
    /// columns (available when m divides n).
    pub exact_duplicate_prob: Option<f64>,
    pub eps: f64,
    pub d: usize,
    pub m: usize,
    pub n: usize,
    pub delta: f64,
    /// Wilson upper bound of the failure estimate is at most delta.
    pub within_delta: bool,
    pub distortion_tolerance: f64,
}

/// Estimates the failure probability of the block-Hadamard sketch on D_1 at
/// distortion level 0 (tolerance 1e-9). Failures require two selectors on
/// identical concatenated columns.
pub fn demo_hadamard_tightness(
    eps: f64,
    d: usize,
    m: usize,
    n: usize,
    delta: f64,
    trials: u64,
    seed: u64,
) -> Result<DemoReport> {
    const TOL: f64 = 1e-9;
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    let pi = crate::constructions::gen_hadamard_block(eps, m, n)?;
    if d > n {
        return Err(Error::Infeasible(format!("d = {d} selectors exceed n = {n}")));
    }
    let outcomes: Vec<(bool, f64)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut trng = rng_from(seed, &[DOMAIN_SWEEP, d as u64, m as u64, t]);
            let inst_seed = trng.random::<u64>();
            let inst = sample_d_beta(n, d, 1, inst_seed).expect("d <= n checked");
            let report =
                crate::embedcheck::check_embedding(&pi, &inst, TOL).expect("dimensions match");
            (report.pass, report.eps_effective)
        })
        .collect();
    let failures = outcomes.iter().filter(|(pass, _)| !pass).count() as u64;
    let max_eps_effective = outcomes
        .iter()
        .filter(|(pass, _)| *pass)
        .map(|&(_, e)| e)
        .fold(0.0f64, f64::max);

    let exact_duplicate_prob = if n.is_multiple_of(m) {
        let copies = (n / m) as f64;
        let mut no_dup = 1.0;
        for i in 1..d {
            no_dup *= ((m - i) as f64 * copies) / (n - i) as f64;
        }
        Some(1.0 - no_dup)
    } else {
        None
    };
    let estimate = FailureEstimate::from_counts(failures, trials);
    Ok(DemoReport {
        within_delta: estimate.wilson_high <= delta,
        estimate,
        max_eps_effective,
        exact_duplicate_prob,
        eps,
        d,
        m,
        n,
        delta,
        distortion_tolerance: TOL,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuditRow {
    pub ell: u32,
    pub theta: f64,
    pub avg_heavy: f64,
}

/// Heavy-entry ladder of a sketch, restricted to columns of norm 1±ε.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuditReport {
    pub rows: Vec<AuditRow>,
    pub ladder_depth: u32,
    pub pi_prime_columns: usize,
    pub pi_prime_empty: bool,
    /// Upper bound on the average squared column norm implied by the ladder
    /// counts plus the light-entry budget.
    pub implied_sq_norm_bound: f64,
    pub actual_avg_sq_norm: f64,
}

/// Average √(2^-ℓ)-heavy entry counts over ℓ = 0..L for the norm-window
/// submatrix Π′, with the implied squared-norm bound.
pub fn heavy_entry_audit(pi: &SketchMatrix, eps: f64) -> Result<AuditReport> {
    let depth = general_ladder_depth(eps)?;
    let prime: Vec<usize> = (0..pi.cols())
        .filter(|&c| {
            let norm = pi.column_norm(c);
            norm >= 1.0 - eps && norm <= 1.0 + eps
        })
        .collect();
    let empty = prime.is_empty();

    let mut rows = Vec::new();
    let mut avgs = Vec::new();
    for ell in 0..=depth {
        let theta = 2.0f64.powi(-(ell as i32)).sqrt();
        let avg = if empty {
            0.0
        } else {
            prime
                .iter()
                .map(|&c| {
                    pi.column(c)
                        .iter()
                        .filter(|&&(_, v)| v.abs() >= theta)
                        .count() as f64
                })
                .sum::<f64>()
                / prime.len() as f64
        };
        avgs.push(avg);
        rows.push(AuditRow { ell, theta, avg_heavy: avg });
    }

    let actual_avg_sq_norm = if empty {
        0.0
    } else {
        prime
            .iter()
            .map(|&c| {
                pi.column(c)
                    .iter()
                    .map(|&(_, v)| v * v)
                    .sum::<f64>()
            })
            .sum::<f64>()
            / prime.len() as f64
    };
    // Entries at level ell (2^-ell <= v^2 < 2^-ell+1) contribute at most
    // 2^-(ell-1) each; entries below the ladder at most s * 2^-L per column.
    let implied_sq_norm_bound = if empty {
        0.0
    } else {
        let mut bound = avgs[0] * (1.0 + eps) * (1.0 + eps);
        for ell in 1..=depth as usize {
            bound += (avgs[ell] - avgs[ell - 1]) * 2.0f64.powi(-(ell as i32 - 1));
        }
        bound + pi.max_col_nnz() as f64 * 2.0f64.powi(-(depth as i32))
    };

    Ok(AuditReport {
        rows,
        ladder_depth: depth,
        pi_prime_columns: prime.len(),
        pi_prime_empty: empty,
        implied_sq_norm_bound,
        actual_avg_sq_norm,
    })
}

/// Aggregate pair-finder behaviour over many instances of D_1.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CollisionStats {
    pub runs: usize,
    pub pairs_per_run: Vec<usize>,
    pub runs_with_pairs: usize,
    /// Runs with at least one pair of signed inner product >= (8-κ)ε.
    pub success_runs: usize,
    pub success_fraction: f64,
    /// Mean shared heavy rows over every emitted pair; None when no pairs
    /// were emitted.
    pub mean_shared_heavy_rows: Option<f64>,
    /// Mean shared heavy rows over all ordered colliding good-column pairs
    /// of Π itself (Δ̂, self-pairs included); None when no column collides.
    pub population_shared_heavy_rows: Option<f64>,
    pub inner_product_threshold: f64,
}

/// Mean shared θ-heavy rows over the ordered colliding pairs of `good`
/// columns, self-pairs included.
fn population_delta(pi: &SketchMatrix, good: &[usize], theta: f64) -> Option<f64> {
    let mut row_members: Vec<Vec<usize>> = vec![Vec::new(); pi.rows()];
    let mut heavy_rows: Vec<Vec<usize>> = Vec::with_capacity(good.len());
    for (gi, &c) in good.iter().enumerate() {
        let rows: Vec<usize> = pi
            .column(c)
            .iter()
            .filter(|&&(_, v)| v.abs() >= theta)
            .map(|&(r, _)| r)
            .collect();
        for &l in &rows {
            row_members[l].push(gi);
        }
        heavy_rows.push(rows);
    }
    // sum of shared-row counts over ordered pairs = sum of squared row loads
    let shared_total: usize = row_members.iter().map(|m| m.len() * m.len()).sum();
    // number of ordered colliding pairs, counted by a stamped union per column
    let mut stamp = vec![0u32; good.len()];
    let mut counter = 0u32;
    let mut colliding_pairs = 0usize;
    for rows in &heavy_rows {
        counter += 1;
        for &l in rows {
            for &other in &row_members[l] {
                if stamp[other] != counter {
                    stamp[other] = counter;
                    colliding_pairs += 1;
                }
            }
        }
    }
    (colliding_pairs > 0).then(|| shared_total as f64 / colliding_pairs as f64)
}

/// Runs the unit-block pair finder across instance seeds and summarizes pair
/// yield, the large-inner-product success rate, and Δ̂.
pub fn collision_pair_stats(
    pi: &SketchMatrix,
    inst_seeds: &[u64],
    d: usize,
    eps: f64,
    eta: f64,
    kappa: f64,
) -> Result<CollisionStats> {
    if inst_seeds.is_empty() {
        return Err(Error::InvalidParameter("need at least one seed".into()));
    }
    let params = crate::adversary::PairParams::standard(eps, d, eta)?;
    let profile = crate::adversary::heavy_profile(
        pi,
        params.theta,
        eps,
        params.good_count_threshold,
    );
    let population = population_delta(pi, &profile.good_columns, params.theta);
    let threshold = (8.0 - kappa) * eps;
    let mut pairs_per_run = Vec::with_capacity(inst_seeds.len());
    let mut success_runs = 0usize;
    let mut shared_sum = 0usize;
    let mut shared_pairs = 0usize;
    for &seed in inst_seeds {
        let inst = sample_d_beta(pi.cols(), d, 1, seed)?;
        let finding: PairFinding = find_colliding_pairs(pi, &inst, eps, eta, seed)?;
        pairs_per_run.push(finding.pairs.len());
        let mut success = false;
        for &(a, b) in &finding.pairs {
            shared_sum += shared_heavy_rows(pi, a, b, finding.params.theta).len();
            shared_pairs += 1;
            if pi.column_inner_product(a, b)? >= threshold {
                success = true;
            }
        }
        if success {
            success_runs += 1;
        }
    }
    let runs_with_pairs = pairs_per_run.iter().filter(|&&p| p > 0).count();
    Ok(CollisionStats {
        runs: inst_seeds.len(),
        success_fraction: success_runs as f64 / inst_seeds.len() as f64,
        success_runs,
        runs_with_pairs,
        mean_shared_heavy_rows: (shared_pairs > 0)
            .then(|| shared_sum as f64 / shared_pairs as f64),
        population_shared_heavy_rows: population,
        pairs_per_run,
        inner_product_threshold: threshold,
    })
}
