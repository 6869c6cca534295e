//! Adversarial lower-bound machinery as executable procedures: heavy-entry
//! statistics, the greedy disjoint-pair finder over good columns (with the
//! rescaled variant for general block sizes), witness construction, and the
//! exact sign-enumeration behind the anti-concentration bound.
//!
//! A column of Π is θ-heavy in a row when the entry's absolute value is at
//! least θ; two columns collide when they share a heavy row. A column is good
//! when it carries enough heavy entries and has ℓ2-norm within 1±ε. The pair
//! finder walks the selector list of a hard instance, maintaining a shrinking
//! good set G_k and surviving selector set S_k, and emits disjoint colliding
//! pairs; every run is traced so the structural invariants (monotone nonempty
//! sets, at most two selector removals per iteration, pair disjointness) can
//! be asserted from the outside.

use crate::error::{Error, Result};
use crate::hardinstances::HardInstance;
use crate::rng::{rng_from, DOMAIN_ANTICONC, DOMAIN_PAIR_FINDER};
use crate::sparsemat::{SketchMatrix, SparseVec};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Per-column θ-heavy counts and the induced set of good columns.
#[derive(Debug, Clone)]
pub struct HeavyProfile {
    pub theta: f64,
    pub per_column_counts: Vec<usize>,
    /// Mean heavy count over all columns.
    pub average: f64,
    /// Columns with at least `good_count_threshold` heavy entries and norm in
    /// [1-ε, 1+ε], ascending.
    pub good_columns: Vec<usize>,
}

/// Counts θ-heavy entries per column and flags the good columns.
pub fn heavy_profile(
    pi: &SketchMatrix,
    theta: f64,
    eps: f64,
    good_count_threshold: usize,
) -> HeavyProfile {
    assert!(theta > 0.0, "heaviness threshold must be positive");
    let mut per_column_counts = Vec::with_capacity(pi.cols());
    let mut good_columns = Vec::new();
    for c in 0..pi.cols() {
        let count = pi.column(c).iter().filter(|&&(_, v)| v.abs() >= theta).count();
        per_column_counts.push(count);
        if count >= good_count_threshold {
            let norm = pi.column_norm(c);
            if norm >= 1.0 - eps && norm <= 1.0 + eps {
                good_columns.push(c);
            }
        }
    }
    let average = per_column_counts.iter().sum::<usize>() as f64 / pi.cols() as f64;
    HeavyProfile { theta, per_column_counts, average, good_columns }
}

/// Rows in which both columns carry θ-heavy entries.
pub fn shared_heavy_rows(pi: &SketchMatrix, a: usize, b: usize, theta: f64) -> Vec<usize> {
    let heavy = |col: usize| -> Vec<usize> {
        pi.column(col)
            .iter()
            .filter(|&&(_, v)| v.abs() >= theta)
            .map(|&(r, _)| r)
            .collect()
    };
    let (ha, hb) = (heavy(a), heavy(b));
    let (mut p, mut q) = (0, 0);
    let mut out = Vec::new();
    while p < ha.len() && q < hb.len() {
        match ha[p].cmp(&hb[q]) {
            std::cmp::Ordering::Less => p += 1,
            std::cmp::Ordering::Greater => q += 1,
            std::cmp::Ordering::Equal => {
                out.push(ha[p]);
                p += 1;
                q += 1;
            }
        }
    }
    out
}

/// `eps^{delta'}` with `delta' = log2(log2(1/eps^72)) / log2(1/eps)`, the
/// abundance factor of the rescaled pair finder.
pub fn eps_pow_delta_prime(eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "eps must lie in (0, 1), got {eps}"
        )));
    }
    let log_inv = (1.0 / eps).log2();
    let delta_prime = (72.0 * log_inv).log2() / log_inv;
    Ok(eps.powf(delta_prime))
}

/// Resolved thresholds of one pair-finder run. Budgets round down, count
/// thresholds round up.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PairParams {
    pub theta: f64,
    pub good_count_threshold: usize,
    pub phi_threshold: f64,
    pub budget: usize,
    pub eta: f64,
    pub eps: f64,
}

impl PairParams {
    fn validate_common(eps: f64, d: usize, eta: f64) -> Result<()> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "eps must lie in (0, 1), got {eps}"
            )));
        }
        if d == 0 {
            return Err(Error::InvalidParameter("d must be positive".into()));
        }
        if !eta.is_finite() || eta <= 0.0 {
            return Err(Error::InvalidParameter(format!("eta must be positive, got {eta}")));
        }
        Ok(())
    }

    /// Thresholds of the unit-block procedure: heaviness √(8ε), good columns
    /// need ⌈1/(16ε)⌉ heavy entries, collision-rate cutoff η/d, ⌊d/16⌋
    /// iterations.
    pub fn standard(eps: f64, d: usize, eta: f64) -> Result<Self> {
        Self::validate_common(eps, d, eta)?;
        Ok(PairParams {
            theta: (8.0 * eps).sqrt(),
            good_count_threshold: (1.0 / (16.0 * eps)).ceil() as usize,
            phi_threshold: eta / d as f64,
            budget: d / 16,
            eta,
            eps,
        })
    }

    /// Rescaled thresholds for block size 2^ℓ' and heaviness level ℓ:
    /// heaviness √(2^-ℓ), good count ⌈ε^{δ'}·2^ℓ/3⌉, cutoff
    /// η/(ε^{δ'}·d·2^ℓ'), budget ⌊ε^{δ'}·d·2^ℓ'/16⌋.
    pub fn rescaled(eps: f64, d: usize, ell: u32, ell_prime: u32, eta: f64) -> Result<Self> {
        Self::validate_common(eps, d, eta)?;
        if ell == 0 {
            return Err(Error::InvalidParameter("ell must be at least 1".into()));
        }
        let abundance = eps_pow_delta_prime(eps)?;
        let d_cols = d as f64 * (1u64 << ell_prime) as f64;
        Ok(PairParams {
            theta: 2.0f64.powi(-(ell as i32)).sqrt(),
            good_count_threshold: (abundance * (1u64 << ell) as f64 / 3.0).ceil() as usize,
            phi_threshold: eta / (abundance * d_cols),
            budget: (abundance * d_cols / 16.0).floor() as usize,
            eta,
            eps,
        })
    }
}

/// One output event of the pair finder, in the order the algorithm emits them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TraceStep {
    /// A colliding pair of good columns; `s_a`, `s_b` are the selector-list
    /// positions, `col_a`, `col_b` the columns of Π.
    Pair { s_a: usize, s_b: usize, col_a: usize, col_b: usize },
    /// A row was marked and its heavy good columns dropped from G.
    RowMarked { row: usize },
    /// The loop index was not a surviving selector.
    Skip,
    /// A surviving selector found no colliding partner.
    NoPartner { col: usize },
}

/// Set sizes around one transition of the pair finder.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceRecord {
    pub k: usize,
    /// Current index of the outer loop (0-based).
    pub j: usize,
    /// True when the event was emitted inside the row-scanning loop.
    pub during_scan: bool,
    pub g_before: usize,
    pub s_before: usize,
    pub g_after: usize,
    pub s_after: usize,
    pub step: TraceStep,
}

/// Result of one pair-finder run.
#[derive(Debug, Clone)]
pub struct PairFinding {
    /// Emitted colliding column pairs of Π, disjoint in selector positions.
    pub pairs: Vec<(usize, usize)>,
    pub trace: Vec<TraceRecord>,
    pub params: PairParams,
    /// Good columns of Π among the instance selectors (g).
    pub good_selector_count: usize,
    /// Good columns of Π overall (|G_1|).
    pub good_column_count: usize,
}

/// Greedy disjoint colliding-pair search over the good selector columns of a
/// unit-block (r = 1) instance.
pub fn find_colliding_pairs(
    pi: &SketchMatrix,
    inst: &HardInstance,
    eps: f64,
    eta: f64,
    seed: u64,
) -> Result<PairFinding> {
    if inst.r() != 1 {
        return Err(Error::InvalidParameter(format!(
            "unit-block pair finder needs r = 1, instance has r = {}",
            inst.r()
        )));
    }
    let params = PairParams::standard(eps, inst.d(), eta)?;
    run_pair_finder(pi, inst, params, seed)
}

/// The rescaled pair search: instance blocks of size 2^ℓ', heaviness level ℓ.
pub fn find_colliding_pairs_general(
    pi: &SketchMatrix,
    inst: &HardInstance,
    eps: f64,
    ell: u32,
    ell_prime: u32,
    eta: f64,
    seed: u64,
) -> Result<PairFinding> {
    if inst.r() != (1usize << ell_prime) {
        return Err(Error::InvalidParameter(format!(
            "instance has r = {}, expected 2^ell_prime = {}",
            inst.r(),
            1usize << ell_prime
        )));
    }
    let params = PairParams::rescaled(eps, inst.d(), ell, ell_prime, eta)?;
    run_pair_finder(pi, inst, params, seed)
}

struct FinderState {
    /// Good columns of Π, ascending; all index-based state refers to
    /// positions in this list.
    good: Vec<usize>,
    heavy_rows: Vec<Vec<usize>>,
    row_members: Vec<Vec<usize>>,
    alive: Vec<bool>,
    g_count: usize,
    row_alive: Vec<usize>,
    /// Selector-list positions of good selectors, in sampling order, mapped
    /// to good-list indices.
    c_list: Vec<usize>,
    s_alive: Vec<bool>,
    s_count: usize,
    stamp: Vec<u32>,
    stamp_counter: u32,
}

impl FinderState {
    fn remove_good(&mut self, gi: usize) {
        if self.alive[gi] {
            self.alive[gi] = false;
            self.g_count -= 1;
            for &l in &self.heavy_rows[gi] {
                self.row_alive[l] -= 1;
            }
        }
    }

    /// Drops G_k^ℓ, the alive good columns heavy in row `row`.
    fn remove_row_group(&mut self, row: usize) {
        let members = self.row_members[row].clone();
        for gi in members {
            self.remove_good(gi);
        }
    }

    fn remove_selector(&mut self, i: usize) {
        if self.s_alive[i] {
            self.s_alive[i] = false;
            self.s_count -= 1;
        }
    }

    /// Number of alive good columns colliding with good column `gi`
    /// (including `gi` itself when it has a heavy row).
    fn collision_count(&mut self, gi: usize) -> usize {
        self.stamp_counter += 1;
        let mut count = 0;
        for &l in &self.heavy_rows[gi] {
            for &other in &self.row_members[l] {
                if self.alive[other] && self.stamp[other] != self.stamp_counter {
                    self.stamp[other] = self.stamp_counter;
                    count += 1;
                }
            }
        }
        count
    }

    /// True when some alive column's collision rate exceeds the cutoff.
    fn any_rate_above(&mut self, phi_threshold: f64) -> bool {
        let g = self.g_count as f64;
        for gi in 0..self.good.len() {
            if self.alive[gi] && self.collision_count(gi) as f64 > phi_threshold * g {
                return true;
            }
        }
        false
    }

    /// Row maximizing the alive heavy-member count, lowest index on ties.
    fn argmax_row(&self) -> usize {
        let mut best = 0usize;
        let mut best_count = 0usize;
        for (row, &count) in self.row_alive.iter().enumerate() {
            if count > best_count {
                best_count = count;
                best = row;
            }
        }
        best
    }

    fn heavy_at(&self, gi: usize, row: usize) -> bool {
        self.heavy_rows[gi].binary_search(&row).is_ok()
    }

    fn collide(&self, a: usize, b: usize) -> bool {
        let (ha, hb) = (&self.heavy_rows[a], &self.heavy_rows[b]);
        let (mut p, mut q) = (0, 0);
        while p < ha.len() && q < hb.len() {
            match ha[p].cmp(&hb[q]) {
                std::cmp::Ordering::Less => p += 1,
                std::cmp::Ordering::Greater => q += 1,
                std::cmp::Ordering::Equal => return true,
            }
        }
        false
    }

    fn surviving(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.c_list.len()).filter(|&i| self.s_alive[i])
    }
}

fn run_pair_finder(
    pi: &SketchMatrix,
    inst: &HardInstance,
    params: PairParams,
    seed: u64,
) -> Result<PairFinding> {
    let profile = heavy_profile(pi, params.theta, params.eps, params.good_count_threshold);
    let good = profile.good_columns;
    let good_index: HashMap<usize, usize> =
        good.iter().enumerate().map(|(i, &c)| (c, i)).collect();

    let heavy_rows: Vec<Vec<usize>> = good
        .iter()
        .map(|&c| {
            pi.column(c)
                .iter()
                .filter(|&&(_, v)| v.abs() >= params.theta)
                .map(|&(r, _)| r)
                .collect()
        })
        .collect();
    let mut row_members = vec![Vec::new(); pi.rows()];
    let mut row_alive = vec![0usize; pi.rows()];
    for (gi, rows) in heavy_rows.iter().enumerate() {
        for &l in rows {
            row_members[l].push(gi);
            row_alive[l] += 1;
        }
    }

    let c_list: Vec<usize> = inst
        .selectors()
        .iter()
        .filter_map(|c| good_index.get(c).copied())
        .collect();
    let g = c_list.len();
    let good_column_count = good.len();

    let mut finding = PairFinding {
        pairs: Vec::new(),
        trace: Vec::new(),
        params,
        good_selector_count: g,
        good_column_count,
    };
    if g == 0 {
        return Ok(finding);
    }

    let mut st = FinderState {
        alive: vec![true; good.len()],
        g_count: good.len(),
        stamp: vec![0; good.len()],
        stamp_counter: 0,
        s_alive: vec![true; g],
        s_count: g,
        good,
        heavy_rows,
        row_members,
        row_alive,
        c_list,
    };
    let mut rng = rng_from(seed, &[DOMAIN_PAIR_FINDER]);
    let mut k = 1usize;

    for j in 0..params.budget {
        // Row-scanning loop: either collisions are rare everywhere (rate
        // cutoff holds), or the most loaded row intersects the survivors, or
        // that row is marked and dropped.
        let row;
        let mut s_prime: Vec<usize>;
        loop {
            let rate_above = st.any_rate_above(params.phi_threshold);
            let ell = st.argmax_row();
            s_prime = st
                .surviving()
                .filter(|&i| st.heavy_at(st.c_list[i], ell))
                .collect();
            if !rate_above {
                s_prime.clear();
                row = ell;
                break;
            }
            if !s_prime.is_empty() {
                row = ell;
                break;
            }
            let (gb, sb) = (st.g_count, st.s_count);
            st.remove_row_group(ell);
            finding.trace.push(TraceRecord {
                k,
                j,
                during_scan: true,
                g_before: gb,
                s_before: sb,
                g_after: st.g_count,
                s_after: st.s_count,
                step: TraceStep::RowMarked { row: ell },
            });
            k += 1;
        }

        let (gb, sb) = (st.g_count, st.s_count);
        let step;
        if !s_prime.is_empty() {
            if s_prime.len() >= 2 {
                let a = s_prime.remove(rng.random_range(0..s_prime.len()));
                let b = s_prime.remove(rng.random_range(0..s_prime.len()));
                st.remove_selector(a);
                st.remove_selector(b);
                let (col_a, col_b) = (st.good[st.c_list[a]], st.good[st.c_list[b]]);
                finding.pairs.push((col_a, col_b));
                step = TraceStep::Pair { s_a: a, s_b: b, col_a, col_b };
            } else {
                let lone = s_prime[0];
                st.remove_selector(lone);
                st.remove_row_group(row);
                step = TraceStep::RowMarked { row };
            }
        } else if j >= st.c_list.len() || !st.s_alive[j] {
            step = TraceStep::Skip;
        } else {
            let partners: Vec<usize> = st
                .surviving()
                .filter(|&i| i != j && st.collide(st.c_list[i], st.c_list[j]))
                .collect();
            if !partners.is_empty() {
                let a = partners[rng.random_range(0..partners.len())];
                st.remove_selector(a);
                st.remove_selector(j);
                let (col_a, col_b) = (st.good[st.c_list[a]], st.good[st.c_list[j]]);
                finding.pairs.push((col_a, col_b));
                step = TraceStep::Pair { s_a: a, s_b: j, col_a, col_b };
            } else {
                let cj = st.c_list[j];
                st.remove_selector(j);
                let colliding: Vec<usize> = (0..st.good.len())
                    .filter(|&gi| st.alive[gi] && st.collide(gi, cj))
                    .collect();
                for gi in colliding {
                    st.remove_good(gi);
                }
                step = TraceStep::NoPartner { col: st.good[cj] };
            }
        }
        finding.trace.push(TraceRecord {
            k,
            j,
            during_scan: false,
            g_before: gb,
            s_before: sb,
            g_after: st.g_count,
            s_after: st.s_count,
            step,
        });
        k += 1;
    }
    Ok(finding)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnticoncMethod {
    Exhaustive,
    MonteCarlo,
}

impl std::fmt::Display for AnticoncMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AnticoncMethod::Exhaustive => "exhaustive",
            AnticoncMethod::MonteCarlo => "monte_carlo",
        })
    }
}

/// A colliding column pair with its witness direction and, once measured,
/// the anti-concentration probability.
#[derive(Debug, Clone)]
pub struct CollisionCertificate {
    pub col_p: usize,
    pub col_q: usize,
    pub theta: f64,
    pub shared_heavy_rows: Vec<usize>,
    pub inner_product: f64,
    /// Blocks (columns of U) owning the two selectors.
    pub p_prime: usize,
    pub q_prime: usize,
    pub blocks_equal: bool,
    /// Unit witness in ℝ^d: (e_p' + e_q')/√2, or e_p' when the blocks agree.
    pub witness: SparseVec,
    pub anticonc_prob: Option<f64>,
    pub anticonc_method: Option<AnticoncMethod>,
}

/// Builds the witness certificate for a colliding pair of selector columns.
pub fn build_witness(
    pi: &SketchMatrix,
    inst: &HardInstance,
    col_p: usize,
    col_q: usize,
    theta: f64,
) -> Result<CollisionCertificate> {
    if col_p == col_q {
        return Err(Error::InvalidParameter(
            "witness needs two distinct columns".into(),
        ));
    }
    let jp = inst
        .selector_position(col_p)
        .ok_or_else(|| Error::InvalidParameter(format!("column {col_p} is not a selector")))?;
    let jq = inst
        .selector_position(col_q)
        .ok_or_else(|| Error::InvalidParameter(format!("column {col_q} is not a selector")))?;
    let p_prime = inst.block_of(jp);
    let q_prime = inst.block_of(jq);
    let witness = if p_prime == q_prime {
        SparseVec::new(inst.d(), vec![(p_prime, 1.0)])?
    } else {
        let h = 1.0 / 2.0f64.sqrt();
        let (lo, hi) = if p_prime < q_prime {
            (p_prime, q_prime)
        } else {
            (q_prime, p_prime)
        };
        SparseVec::new(inst.d(), vec![(lo, h), (hi, h)])?
    };
    Ok(CollisionCertificate {
        col_p,
        col_q,
        theta,
        shared_heavy_rows: shared_heavy_rows(pi, col_p, col_q, theta),
        inner_product: pi.column_inner_product(col_p, col_q)?,
        p_prime,
        q_prime,
        blocks_equal: p_prime == q_prime,
        witness,
        anticonc_prob: None,
        anticonc_method: None,
    })
}

/// Probability over the instance signs that ‖ΠU u‖² leaves
/// [(1-ε)², (1+ε)²] for the certificate's witness u.
///
/// Only the signs of the blocks touched by the witness matter. When that set
/// has at most 20 members all 2^|S| assignments are enumerated exactly
/// (Gray-code order, one sparse column update per step); beyond that the
/// probability is estimated from `mc_budget` sampled assignments. The method
/// used is recorded on the certificate.
pub fn anticoncentration_prob(
    pi: &SketchMatrix,
    inst: &HardInstance,
    cert: &mut CollisionCertificate,
    eps: f64,
    mc_budget: u64,
    seed: u64,
) -> Result<f64> {
    if pi.cols() != inst.n() {
        return Err(Error::DimensionMismatch(
            "certificate sketch/instance mismatch".into(),
        ));
    }
    let r = inst.r();
    let mut blocks = vec![cert.p_prime];
    if !cert.blocks_equal {
        blocks.push(cert.q_prime);
    }
    // selector positions whose signs enter ||PiU u||^2
    let positions: Vec<usize> = blocks
        .iter()
        .flat_map(|&b| b * r..(b + 1) * r)
        .collect();
    // u weight on each block is 1 or 1/sqrt(2); each selector contributes
    // sigma_j / sqrt(r) times its column
    let coef = if cert.blocks_equal {
        1.0 / (r as f64).sqrt()
    } else {
        1.0 / (2.0 * r as f64).sqrt()
    };
    let columns: Vec<&[(usize, f64)]> = positions
        .iter()
        .map(|&j| pi.column(inst.selectors()[j]))
        .collect();
    let k = positions.len();
    let lo = (1.0 - eps) * (1.0 - eps);
    let hi = (1.0 + eps) * (1.0 + eps);
    let m = pi.rows();

    let rebuild = |signs: &[f64], v: &mut Vec<f64>| -> f64 {
        v.iter_mut().for_each(|x| *x = 0.0);
        for (idx, col) in columns.iter().enumerate() {
            let w = coef * signs[idx];
            for &(row, val) in col.iter() {
                v[row] += w * val;
            }
        }
        v.iter().map(|x| x * x).sum()
    };

    let (prob, method) = if k <= 20 {
        let total = 1u64 << k;
        let mut signs = vec![1.0f64; k];
        let mut v = vec![0.0f64; m];
        let mut sq = rebuild(&signs, &mut v);
        let mut outside = 0u64;
        for step in 0..total {
            if step > 0 {
                let bit = step.trailing_zeros() as usize;
                // resync occasionally so incremental updates cannot drift
                if step % 4096 == 0 {
                    signs[bit] = -signs[bit];
                    sq = rebuild(&signs, &mut v);
                } else {
                    let w = -2.0 * signs[bit] * coef;
                    signs[bit] = -signs[bit];
                    for &(row, val) in columns[bit].iter() {
                        let delta = w * val;
                        sq += delta * (2.0 * v[row] + delta);
                        v[row] += delta;
                    }
                }
            }
            if sq < lo || sq > hi {
                outside += 1;
            }
        }
        (outside as f64 / total as f64, AnticoncMethod::Exhaustive)
    } else {
        if mc_budget == 0 {
            return Err(Error::InvalidParameter(
                "monte carlo fallback needs a positive budget".into(),
            ));
        }
        let mut rng = rng_from(seed, &[DOMAIN_ANTICONC]);
        let mut v = vec![0.0f64; m];
        let mut signs = vec![1.0f64; k];
        let mut outside = 0u64;
        for _ in 0..mc_budget {
            for s in signs.iter_mut() {
                *s = if rng.random::<bool>() { 1.0 } else { -1.0 };
            }
            let sq = rebuild(&signs, &mut v);
            if sq < lo || sq > hi {
                outside += 1;
            }
        }
        (outside as f64 / mc_budget as f64, AnticoncMethod::MonteCarlo)
    };
    cert.anticonc_prob = Some(prob);
    cert.anticonc_method = Some(method);
    Ok(prob)
}

/// Fraction of ordered pairs (u, v) from the set, self-pairs included, with
/// ⟨u, v⟩ ≥ -3ε. For any finite subset of the unit ball and ε < 1/9 this
/// fraction exceeds 2ε.
pub fn verify_small_inner_product(vectors: &[Vec<f64>], eps: f64) -> Result<f64> {
    const KAPPA: f64 = 3.0;
    if !(eps > 0.0 && eps < 1.0 / 9.0) {
        return Err(Error::InvalidParameter(format!(
            "eps must lie in (0, 1/9), got {eps}"
        )));
    }
    if vectors.is_empty() {
        return Err(Error::InvalidParameter("empty vector set".into()));
    }
    let dim = vectors[0].len();
    for (i, v) in vectors.iter().enumerate() {
        if v.len() != dim {
            return Err(Error::DimensionMismatch(format!(
                "vector {i} has length {}, expected {dim}",
                v.len()
            )));
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1.0 + 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "vector {i} has norm {norm} > 1"
            )));
        }
    }
    let mut hits = 0usize;
    for u in vectors {
        for v in vectors {
            let ip: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
            if ip >= -KAPPA * eps {
                hits += 1;
            }
        }
    }
    Ok(hits as f64 / (vectors.len() * vectors.len()) as f64)
}

/// Exact probabilities over the four sign assignments that
/// σ₁x₁ + σ₂x₂ + σ₁σ₂x₃ is ≥ a, respectively ≤ -a. Requires
/// |x₁| ≥ |x₂| ≥ |x₃| and |x₁| ≥ a ≥ 0; both outputs are then ≥ 1/4.
pub fn rademacher_fact_check(x1: f64, x2: f64, x3: f64, a: f64) -> Result<(f64, f64)> {
    if ![x1, x2, x3, a].iter().all(|v| v.is_finite()) {
        return Err(Error::NumericInput("inputs must be finite".into()));
    }
    if !(x1.abs() >= x2.abs() && x2.abs() >= x3.abs()) {
        return Err(Error::InvalidParameter(
            "need |x1| >= |x2| >= |x3|".into(),
        ));
    }
    if !(a >= 0.0 && x1.abs() >= a) {
        return Err(Error::InvalidParameter("need |x1| >= a >= 0".into()));
    }
    // group x2 +- x3 first so one branch is exactly x1 plus a nonnegative term
    let tp = x2 + x3;
    let tm = x2 - x3;
    let sums = [x1 + tp, x1 - tp, -x1 + tm, -x1 - tm];
    let p_up = sums.iter().filter(|&&s| s >= a).count() as f64 / 4.0;
    let p_down = sums.iter().filter(|&&s| s <= -a).count() as f64 / 4.0;
    Ok((p_up, p_down))
}
