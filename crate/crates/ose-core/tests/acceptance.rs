//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line (visible under `cargo test -- --nocapture`).

mod common;

use ose_core::adversary::{
    anticoncentration_prob, build_witness, find_colliding_pairs, heavy_profile,
    rademacher_fact_check, shared_heavy_rows, verify_small_inner_product, AnticoncMethod,
    TraceStep,
};
use ose_core::constructions::{gen_hadamard_block, gen_osnap, ConstructionKind};
use ose_core::embedcheck::HardFamily;
use ose_core::experiments::{
    demo_hadamard_tightness, estimate_failure_fresh, threshold_sweep, MGrid, SweepConfig,
};
use ose_core::hardinstances::{materialize_u, sample_d_beta, HardInstance};
use ose_core::rng::rng_from;
use ose_core::sparsemat::{gram_eigen_bounds, DenseMatrix, SketchMatrix};
use rand::Rng;

fn report(id: u32, desc: &str, pass: bool, detail: String) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("[criterion {id}] {verdict}: {desc} ({detail})");
    assert!(pass, "criterion {id} failed: {detail}");
}

#[test]
fn criterion_1_exact_eigen_oracle() {
    let mut rng = rng_from(101, &[1]);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let entries: Vec<f64> = (0..24).map(|_| rng.random_range(-1.0..1.0)).collect();
        let a = DenseMatrix::new(8, 3, entries).unwrap();
        let (jmin, jmax) = gram_eigen_bounds(&a).unwrap();
        let (omin, omax) = common::charpoly_eigen_bounds_3x3(&a);
        let rel = |x: f64, y: f64| (x - y).abs() / y.abs().max(1e-12);
        worst = worst.max(rel(jmin, omin)).max(rel(jmax, omax));
    }
    report(
        1,
        "Jacobi bounds match characteristic-polynomial bisection on 200 random 8x3 matrices",
        worst <= 1e-8,
        format!("worst relative deviation {worst:.3e}"),
    );
}

#[test]
fn criterion_2_birthday_exactness() {
    let (n, d, trials) = (10_000usize, 2usize, 20_000u64);
    let mut detail = String::new();
    let mut pass = true;
    for m in [2usize, 4, 8, 16] {
        let est = estimate_failure_fresh(
            ConstructionKind::CountSketch,
            1,
            m,
            n,
            HardFamily::DBeta { r: 1 },
            d,
            0.2,
            0.2,
            trials,
            7,
        )
        .unwrap();
        let exact = 1.0 / m as f64;
        let inside = est.wilson_low <= exact && exact <= est.wilson_high;
        pass &= inside;
        detail.push_str(&format!(
            "m={m}: p_hat={:.4} vs 1/m={exact:.4} [{}] ",
            est.p_hat,
            if inside { "in" } else { "OUT" }
        ));
    }
    report(
        2,
        "Count-Sketch failure probability equals the 1/m same-row collision rate",
        pass,
        detail,
    );
}

#[test]
fn criterion_3_quadratic_scaling() {
    let grid = MGrid::Geometric { lo: 16, hi: 600, factor: 1.3 };
    let d_sweep = SweepConfig {
        kind: ConstructionKind::CountSketch,
        s: 1,
        d_list: vec![4, 6, 8, 12],
        eps_list: vec![0.2],
        delta_list: vec![0.2],
        m_grid: grid.clone(),
        trials_per_point: 2000,
        family: HardFamily::DBeta { r: 1 },
        seed: 42,
        n_cap: None,
        force_large_n: false,
    };
    let result = threshold_sweep(&d_sweep).unwrap();
    let fit_d = result.fit.exponent_d.expect("d-axis fit");

    let delta_sweep = SweepConfig {
        d_list: vec![6],
        delta_list: vec![0.4, 0.2, 0.1, 0.05],
        seed: 44,
        ..d_sweep
    };
    let result_delta = threshold_sweep(&delta_sweep).unwrap();
    let fit_delta = result_delta.fit.exponent_delta.expect("delta-axis fit");

    let pass = (1.7..=2.3).contains(&fit_d.exponent)
        && fit_d.r_squared >= 0.9
        && (-1.3..=-0.7).contains(&fit_delta.exponent);
    report(
        3,
        "threshold sweep fits m* ~ d^2 and m* ~ 1/delta",
        pass,
        format!(
            "exponent_d={:.3} (r2={:.4}), exponent_delta={:.3} (r2={:.4}), \
             d-axis m*: {:?}, delta-axis m*: {:?}",
            fit_d.exponent,
            fit_d.r_squared,
            fit_delta.exponent,
            fit_delta.r_squared,
            result
                .thresholds
                .iter()
                .map(|t| (t.d, t.m_star))
                .collect::<Vec<_>>(),
            result_delta
                .thresholds
                .iter()
                .map(|t| (t.delta, t.m_star))
                .collect::<Vec<_>>()
        ),
    );
}

#[test]
fn criterion_4_anticoncentration_bound() {
    let mut pass = true;
    let mut worst = 1.0f64;
    for i in 0..100u64 {
        let mut rng = rng_from(4040, &[i]);
        let r = [1usize, 2, 4][rng.random_range(0..3)];
        let same_block = r > 1 && rng.random::<bool>();
        let eps: f64 = rng.random_range(0.01..0.1);
        let lambda: f64 = rng.random_range(5.0..8.0);
        let ip = lambda * eps * r as f64;
        let flip = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let a = ip.sqrt();

        // planted colliding pair at columns 0 and 1 (shared row 0), junk in
        // disjoint rows elsewhere
        let n = 64usize;
        let m = 48usize;
        let d = 2usize;
        let k = d * r;
        let mut columns = vec![Vec::new(); n];
        columns[0] = vec![(0, a), (1, rng.random_range(0.3..1.0))];
        columns[1] = vec![(0, flip * a), (2, rng.random_range(0.3..1.0))];
        for (slot, col) in columns.iter_mut().enumerate().skip(2).take(k) {
            let base = 3 + 2 * slot;
            col.push((base, rng.random_range(0.2..1.0)));
            col.push((base + 1, -rng.random_range(0.2..1.0f64)));
        }
        let pi = SketchMatrix::new(m, n, 4, columns).unwrap();

        let mut selectors: Vec<usize> = Vec::new();
        let mut next_other = 2usize;
        for slot in 0..k {
            let q_slot = if same_block { 1 } else { r };
            if slot == 0 {
                selectors.push(0);
            } else if slot == q_slot {
                selectors.push(1);
            } else {
                selectors.push(next_other);
                next_other += 1;
            }
        }
        let signs: Vec<i8> = (0..k).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
        let inst = HardInstance::new(n, d, r, selectors, signs).unwrap();

        let mut cert = build_witness(&pi, &inst, 0, 1, a).unwrap();
        assert!(cert.inner_product.abs() >= 5.0 * eps * r as f64 - 1e-12);
        assert!(cert.witness.entries().len() <= 2);
        let s_size = if cert.blocks_equal { r } else { 2 * r };
        assert!(s_size <= 12);
        let prob = anticoncentration_prob(&pi, &inst, &mut cert, eps, 0, 1).unwrap();
        assert_eq!(cert.anticonc_method, Some(AnticoncMethod::Exhaustive));
        worst = worst.min(prob);
        pass &= prob >= 0.25;
    }
    report(
        4,
        "exhaustive anti-concentration probability is at least 1/4 on 100 planted collisions",
        pass,
        format!("minimum probability {worst:.4}"),
    );
}

#[test]
fn criterion_5_rademacher_fact() {
    let mut rng = rng_from(505, &[1]);
    let mut pass = true;
    let mut worst = 1.0f64;
    for _ in 0..10_000 {
        let mut xs: Vec<f64> = (0..3).map(|_| rng.random_range(-3.0..3.0)).collect();
        xs.sort_by(|a, b| b.abs().partial_cmp(&a.abs()).unwrap());
        let (up, down) = rademacher_fact_check(xs[0], xs[1], xs[2], xs[0].abs()).unwrap();
        worst = worst.min(up).min(down);
        pass &= up >= 0.25 && down >= 0.25;
    }
    report(
        5,
        "both tail probabilities are >= 1/4 over 1e4 random triples",
        pass,
        format!("minimum tail probability {worst}"),
    );
}

#[test]
fn criterion_6_small_inner_product() {
    let mut rng = rng_from(606, &[1]);
    let mut pass = true;
    let mut worst_margin = f64::INFINITY;
    for _ in 0..1000 {
        let size = rng.random_range(2..=50);
        let dim = rng.random_range(2..=10);
        let vectors: Vec<Vec<f64>> = (0..size)
            .map(|_| {
                let mut v: Vec<f64> = (0..dim)
                    .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
                    .collect();
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
                let target: f64 = rng.random_range(0.05..1.0);
                v.iter_mut().for_each(|x| *x *= target / norm);
                v
            })
            .collect();
        for eps in [0.02, 0.05, 0.1] {
            let frac = verify_small_inner_product(&vectors, eps).unwrap();
            worst_margin = worst_margin.min(frac - 2.0 * eps);
            pass &= frac > 2.0 * eps;
        }
    }
    report(
        6,
        "pair fraction with inner product >= -3 eps exceeds 2 eps on 1e3 random sets",
        pass,
        format!("worst margin above 2 eps: {worst_margin:.4}"),
    );
}

#[test]
fn criterion_7_hadamard_tightness() {
    let result = demo_hadamard_tightness(1.0 / 32.0, 4, 64, 64, 0.05, 1000, 7).unwrap();
    let pass = result.estimate.failures == 0 && result.max_eps_effective <= 1e-9;
    report(
        7,
        "single-copy block-Hadamard sketch embeds D_1 with zero distortion on 1e3 trials",
        pass,
        format!(
            "failures {}, max eps_effective {:.3e}",
            result.estimate.failures, result.max_eps_effective
        ),
    );
}

#[test]
fn criterion_8_pair_finder_invariants() {
    let eps = 1.0 / 32.0;
    let eta = 3.0;
    let d = 48;
    let mut violations = Vec::new();
    let mut total_pairs = 0usize;
    let mut runs = 0usize;

    let mut check_run = |pi: &SketchMatrix, run_seed: u64| {
        runs += 1;
        let inst = sample_d_beta(pi.cols(), d, 1, run_seed + 1000).unwrap();
        let finding = find_colliding_pairs(pi, &inst, eps, eta, run_seed).unwrap();
        total_pairs += finding.pairs.len();
        let profile = heavy_profile(
            pi,
            finding.params.theta,
            eps,
            finding.params.good_count_threshold,
        );

        let mut prev: Option<(usize, usize)> = None;
        let mut removed_per_j: std::collections::HashMap<usize, usize> =
            std::collections::HashMap::new();
        let mut used_selectors = std::collections::HashSet::new();
        for rec in &finding.trace {
            if rec.g_after > rec.g_before || rec.s_after > rec.s_before {
                violations.push(format!("seed {run_seed}: set grew at k={}", rec.k));
            }
            if rec.g_after == 0 || rec.s_after == 0 {
                violations.push(format!("seed {run_seed}: empty set at k={}", rec.k));
            }
            if let Some((g, s)) = prev {
                if rec.g_before != g || rec.s_before != s {
                    violations.push(format!("seed {run_seed}: discontinuous trace at k={}", rec.k));
                }
            }
            prev = Some((rec.g_after, rec.s_after));
            if !rec.during_scan {
                *removed_per_j.entry(rec.j).or_default() += rec.s_before - rec.s_after;
            }
            if let TraceStep::Pair { s_a, s_b, col_a, col_b } = &rec.step {
                if !used_selectors.insert(*s_a) || !used_selectors.insert(*s_b) {
                    violations.push(format!("seed {run_seed}: selector reused in pair"));
                }
                if shared_heavy_rows(pi, *col_a, *col_b, finding.params.theta).is_empty() {
                    violations.push(format!("seed {run_seed}: emitted non-colliding pair"));
                }
                if profile.good_columns.binary_search(col_a).is_err()
                    || profile.good_columns.binary_search(col_b).is_err()
                {
                    violations.push(format!("seed {run_seed}: pair outside good set"));
                }
            }
        }
        for (j, removed) in removed_per_j {
            if removed > 2 {
                violations.push(format!(
                    "seed {run_seed}: iteration {j} removed {removed} selectors"
                ));
            }
        }
    };

    for seed in 0..200u64 {
        let pi = gen_osnap(256, 512, 2, seed).unwrap();
        check_run(&pi, seed);
    }
    for seed in 200..350u64 {
        let pi = gen_osnap(128, 256, 4, seed).unwrap();
        check_run(&pi, seed);
    }
    let hadamard = gen_hadamard_block(eps, 64, 64).unwrap();
    for seed in 350..500u64 {
        check_run(&hadamard, seed);
    }

    report(
        8,
        "pair-finder traces satisfy the structural invariants on 500 random runs",
        violations.is_empty(),
        format!(
            "runs {runs}, pairs emitted {total_pairs}, violations {:?}",
            violations.iter().take(5).collect::<Vec<_>>()
        ),
    );
}

#[test]
fn criterion_9_hard_instance_isometry() {
    let (n, d) = (200usize, 3usize);
    let mut worst = 0.0f64;
    for (i, r) in [1usize, 2, 4, 8].iter().enumerate() {
        for seed in 0..250u64 {
            let inst = sample_d_beta(n, d, *r, seed + 10_000 * i as u64).unwrap();
            let cols: Vec<Vec<f64>> = materialize_u(&inst)
                .iter()
                .map(|c| c.to_dense())
                .collect();
            for a in 0..d {
                for b in 0..d {
                    let ip: f64 = cols[a].iter().zip(&cols[b]).map(|(x, y)| x * y).sum();
                    let expect = if a == b { 1.0 } else { 0.0 };
                    worst = worst.max((ip - expect).abs());
                }
            }
        }
    }
    report(
        9,
        "materialized hard instances are exact isometries across r in {1,2,4,8}",
        worst <= 1e-12,
        format!("max |U^T U - I| entry {worst:.3e} over 1000 samples"),
    );
}
