//! Release gate: one test per numbered criterion, each printing a single
//! pass/fail line (run with `--nocapture` to see them on success). Every
//! tolerance is pinned here; a change in any of these numbers is a change in
//! what the crate promises.

use std::collections::BTreeMap;
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use clb::advantage::{
    builtin_scenarios, max_steps, min_success_probability, qubit_count, FlowScenario, LogBase,
    StepBudget,
};
use clb::block_encoding::{
    ancilla_bound, apply_postselect, dilate, multi_step_success, normalized_padded, sparse_scale,
    SparseMatrixDesc,
};
use clb::carleman::{
    fig1_data, fig4_data, lift_initial, min_truncation_order, truncation_error, Fig1Params,
    Fig4Params, LogisticParams,
};
use clb::lbm::clb2::{build_clb2, lbm_error_run, LbmErrorParams, DEFAULT_CLB2_CAP};
use clb::lbm::{FlowState, LatticeModel};
use clb::multiscale::{
    coarse_grain_error, multiscale_run, CoarseGrainPair, MultiscaleParams, ReconstructMethod,
};
use clb::sparse::Coo;
use clb::table::Table;

/// Prints the criterion verdict even when an assertion unwinds.
struct Criterion {
    number: usize,
    what: &'static str,
    passed: bool,
    started: Instant,
    budget: Duration,
}

impl Criterion {
    fn start(number: usize, what: &'static str, budget: Duration) -> Self {
        Criterion {
            number,
            what,
            passed: false,
            started: Instant::now(),
            budget,
        }
    }

    fn pass(mut self) {
        let elapsed = self.started.elapsed();
        assert!(
            elapsed < self.budget,
            "criterion {} exceeded its {:?} budget: took {elapsed:?}",
            self.number,
            self.budget
        );
        self.passed = true;
        println!(
            "criterion {}: pass — {} ({elapsed:.2?})",
            self.number, self.what
        );
    }
}

impl Drop for Criterion {
    fn drop(&mut self) {
        if !self.passed {
            println!("criterion {}: fail — {}", self.number, self.what);
        }
    }
}

#[test]
fn criterion_1_quadratic_flow_reproduction() {
    let c = Criterion::start(
        1,
        "stable branch 1e-9 pointwise, blow-up at ln(3/2) ± 1e-3, ε_k decreasing with ε₁ = 0.12484 ± 1e-4",
        Duration::from_secs(1),
    );

    let params = Fig1Params::default();
    assert_eq!((params.x0_stable, params.ratio), (0.5, 1.5));
    let data = fig1_data(&params).unwrap();
    let stable = LogisticParams::new(params.x0_stable, params.a, params.ratio).unwrap();

    let t = data.table.float_column("t").unwrap();
    let xs = data.table.float_column("x_stable").unwrap();
    for (t, x) in t.iter().zip(&xs) {
        let (t, x) = (t.unwrap(), x.unwrap());
        assert!(
            (x - stable.exact(t).unwrap()).abs() <= 1e-9,
            "stable branch off closed form at t = {t}"
        );
    }

    let blowup = data.blowup_time.expect("unstable branch must blow up");
    assert!(
        (blowup - 1.5f64.ln()).abs() <= 1e-3,
        "blow-up at {blowup}, expected ln(3/2) = {}",
        1.5f64.ln()
    );

    let eps: Vec<f64> = (1..=4)
        .map(|k| truncation_error(&stable, k, 2.0).unwrap())
        .collect();
    for pair in eps.windows(2) {
        assert!(pair[1] < pair[0], "ε_k not strictly decreasing: {eps:?}");
    }
    assert!((eps[0] - 0.12484).abs() <= 1e-4, "ε₁ = {}", eps[0]);

    c.pass();
}

#[test]
fn criterion_2_truncation_order_map() {
    let c = Criterion::start(
        2,
        "k_min grows monotonically toward R → 2 at every tolerance; k_min(R → 0⁺) = 1",
        Duration::from_secs(60),
    );

    let params = Fig4Params::default();
    assert_eq!((params.ratio_points, params.eps_points), (100, 50));
    let table = fig4_data(&params).unwrap();
    let ratios = table.float_column("R").unwrap();
    let levels = table.float_column("log10_eps").unwrap();
    let orders = table.float_column("k_min").unwrap();

    // Group the long-format rows by tolerance level; rows arrive in
    // ascending-R order, so each group must be non-decreasing with any
    // no-fit (masked) tail treated as past the cap.
    let mut by_level: BTreeMap<i64, Vec<(f64, Option<f64>)>> = BTreeMap::new();
    for i in 0..table.rows.len() {
        let key = (levels[i].unwrap() * 1e6).round() as i64;
        by_level
            .entry(key)
            .or_default()
            .push((ratios[i].unwrap(), orders[i]));
    }
    assert_eq!(by_level.len(), params.eps_points);
    for group in by_level.values() {
        assert_eq!(group.len(), params.ratio_points);
        let mut last = 0.0;
        let mut capped = false;
        for &(ratio, k) in group {
            match k {
                Some(k) => {
                    assert!(!capped, "order reappeared after the cap at R = {ratio}");
                    assert!(k >= last, "k_min fell from {last} to {k} at R = {ratio}");
                    last = k;
                }
                None => capped = true,
            }
        }
        assert!(last > 1.0, "k_min never grew along the sweep");
    }

    // In the R → 0⁺ limit a single order suffices at every tolerance in the
    // sweep; the loosest tolerance reaches that already at the grid edge.
    let tiny = LogisticParams::new(0.5, 1.0, 1e-6).unwrap();
    for eps in [params.eps_min, 1e-4, 1e-2, params.eps_max] {
        assert_eq!(
            min_truncation_order(&tiny, eps, params.t, params.k_cap).unwrap(),
            Some(1),
            "R → 0⁺ needs more than order 1 at eps = {eps}"
        );
    }
    let loosest = by_level.values().next_back().unwrap();
    assert_eq!(loosest[0].1, Some(1.0));

    c.pass();
}

#[test]
fn criterion_3_lifted_lattice_vs_classical() {
    let c = Criterion::start(
        3,
        "G=16, ω=1, Mach 0.05, 100 steps: L∞ ≤ 1e-3 and halving Mach shrinks it ≥ 3×",
        Duration::from_secs(60),
    );

    let params = LbmErrorParams::default();
    assert_eq!(
        (params.g, params.omega, params.mach, params.steps),
        (16, 1.0, 0.05, 100)
    );
    let full = final_linf(&lbm_error_run(&params).unwrap().table());
    assert!(full <= 1e-3, "L∞ after 100 steps is {full}");

    let halved = LbmErrorParams {
        mach: params.mach / 2.0,
        ..params
    };
    let half = final_linf(&lbm_error_run(&halved).unwrap().table());
    assert!(
        full >= 3.0 * half,
        "halving Mach only reduced the error from {full} to {half}"
    );

    c.pass();
}

fn final_linf(table: &Table) -> f64 {
    table
        .float_column("linf_error")
        .unwrap()
        .last()
        .unwrap()
        .unwrap()
}

#[test]
fn criterion_4_block_encoding_exactness() {
    let c = Criterion::start(
        4,
        "21 encodings: unitarity/block residuals ≤ 1e-10, post-selection vs dense oracle 1e-12, 10-step direction 1e-8",
        Duration::from_secs(60),
    );

    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for case in 0..20 {
        let n = rng.random_range(2..=12);
        let mut triplets = Vec::new();
        for r in 0..n {
            for col in 0..n {
                if col != r && rng.random_bool(0.7) {
                    triplets.push((r, col, rng.random_range(-1.0..1.0)));
                }
            }
            // A full zero row is legal but dull; pin the diagonal instead.
            triplets.push((r, r, rng.random_range(0.1..1.0)));
        }
        let matrix = Coo::from_triplets(n, n, triplets).unwrap();
        let (alpha, _) = sparse_scale(&SparseMatrixDesc::from_matrix(matrix.clone()));
        let q_a = 1 + (case % 3) as u32;
        let raw: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        check_encoding(&matrix, alpha, q_a, &raw);
    }

    // The lifted lattice step map itself, dilated with a single ancilla to
    // keep the dense unitary desk-sized.
    let model = LatticeModel::d1q3();
    let system = build_clb2(&model, 4, 1.0, DEFAULT_CLB2_CAP).unwrap();
    let (alpha, _) = sparse_scale(&SparseMatrixDesc::from_matrix(system.step_map.matrix.clone()));
    let initial = FlowState::sine_wave(&model, 4, 1e-2, 0.05).unwrap();
    let lifted = lift_initial(&initial.f, 2);
    check_encoding(&system.step_map.matrix, alpha, 1, &lifted);

    c.pass();
}

/// Shared exactness battery for one matrix: dilate, audit the unitary, then
/// march 10 post-selected steps against a dense renormalized reference.
fn check_encoding(matrix: &Coo, alpha: f64, q_a: u32, raw_state: &[f64]) {
    let be = dilate(matrix, alpha, q_a).unwrap();
    let d = be.system_dim();
    let full = be.u.nrows();
    assert_eq!(full, d << q_a);

    let utu = be.u.transpose() * &be.u;
    let mut worst = 0.0f64;
    for r in 0..full {
        for col in 0..full {
            let target = if r == col { 1.0 } else { 0.0 };
            worst = worst.max((utu[(r, col)] - target).abs());
        }
    }
    assert!(worst <= 1e-10, "unitarity residual {worst}");

    // The top-left block must be the padded matrix over alpha; padding
    // coordinates carry exact identity.
    let mut scaled = DMatrix::<f64>::zeros(d, d);
    for &(r, col, v) in matrix.entries() {
        scaled[(r, col)] = v / alpha;
    }
    for i in matrix.nrows()..d {
        scaled[(i, i)] = 1.0;
    }
    let mut block = 0.0f64;
    for r in 0..d {
        for col in 0..d {
            block = block.max((be.u[(r, col)] - scaled[(r, col)]).abs());
        }
    }
    assert!(block <= 1e-10, "block residual {block}");

    // One-step post-selection against a dense oracle.
    let psi0 = normalized_padded(raw_state, d).unwrap();
    let (state, p) = apply_postselect(&be, &psi0).unwrap();
    let oracle = &scaled * DMatrix::from_column_slice(d, 1, &psi0);
    let oracle_p: f64 = oracle.iter().map(|v| v * v).sum();
    assert!((p - oracle_p).abs() <= 1e-12, "p {p} vs oracle {oracle_p}");
    let inv = oracle_p.sqrt().recip();
    for i in 0..d {
        assert!((state[i] - oracle[i] * inv).abs() <= 1e-12);
    }

    // Ten steps: the post-selected state must track the classical marching
    // direction (renormalized repeated application of the same map).
    let run = multi_step_success(&be, &psi0, 10).unwrap();
    let mut reference = DMatrix::from_column_slice(d, 1, &psi0);
    for _ in 0..10 {
        reference = &scaled * reference;
        let norm = reference.norm();
        assert!(norm > 0.0);
        reference /= norm;
    }
    let last = run.states.last().unwrap();
    for i in 0..d {
        assert!(
            (last[i] - reference[i]).abs() <= 1e-8,
            "direction off at coordinate {i}"
        );
    }
    assert!(run.log10_cumulative.is_finite());
}

#[test]
fn criterion_5_resource_calculus_goldens() {
    let c = Criterion::start(
        5,
        "success-floor goldens, qubit count 60, 1e15 flops, exact log-space cumulative",
        Duration::from_secs(1),
    );

    let weather_long = min_success_probability(1e27, 1_000_000_000, 2, LogBase::Natural).unwrap();
    assert!((weather_long - 0.99999994).abs() <= 1e-8);
    assert!((weather_long - 0.9999999426532207).abs() <= 1e-12);
    assert!(((1.0 - weather_long) - 5.7e-8).abs() <= 1e-8);

    let faucet_ten = min_success_probability(1e9, 10, 2, LogBase::Natural).unwrap();
    assert!((faucet_ten - 0.18).abs() <= 0.01);
    assert!((faucet_ten - 0.18270432131132303).abs() <= 1e-12);

    assert_eq!(qubit_count(1e9, 2).unwrap(), 60);

    let faucet = FlowScenario::from_reynolds("faucet", 1e4).unwrap();
    assert_eq!(faucet.classical_flops(), 1e15);

    // 1000 steps at p = 1e-4 each: the log-space accumulator the march
    // reports must land on -4000 with no rounding residue at all.
    let mut acc = 0.0f64;
    for _ in 0..1000 {
        acc += 1e-4f64.log10();
    }
    assert_eq!(acc, -4000.0);

    c.pass();
}

#[test]
fn criterion_6_success_floor_structure() {
    let c = Criterion::start(
        6,
        "floors rise with T, order strictly by scale, cross each ancilla bar once; step budgets consistent",
        Duration::from_secs(1),
    );

    let scenarios = builtin_scenarios();
    assert_eq!(scenarios.len(), 3);
    let grids: Vec<f64> = scenarios.iter().map(|s| s.grid_points()).collect();

    let mut curves: Vec<Vec<f64>> = Vec::new();
    for &g in &grids {
        let curve: Vec<f64> = (1..=100)
            .map(|t| min_success_probability(g, t, 2, LogBase::Natural).unwrap())
            .collect();
        for pair in curve.windows(2) {
            assert!(pair[1] > pair[0], "floor not rising with T");
        }
        curves.push(curve);
    }

    // The floor (k·ln G / G)^(1/T) falls as the scale G grows — the larger
    // scenario always sits on the lower curve.
    for ((small, mid), large) in curves[0].iter().zip(&curves[1]).zip(&curves[2]) {
        assert!(small > mid && mid > large);
    }

    // Each ancilla bar 4^{-q_a} is crossed exactly once on T = 1..=100.
    for curve in &curves {
        for q_a in 1..=10u32 {
            let bar = ancilla_bound(q_a);
            let crossings = curve
                .windows(2)
                .filter(|w| (w[0] <= bar) != (w[1] <= bar))
                .count();
            assert!(curve[0] <= bar && curve[99] > bar);
            assert_eq!(crossings, 1, "bar 4^-{q_a} crossed {crossings} times");
        }
    }

    // The step budget is the last T whose floor still fits under the bar.
    for &g in &grids {
        for q_a in 1..=10u32 {
            let bar = ancilla_bound(q_a);
            match max_steps(g, 2, q_a, LogBase::Natural).unwrap() {
                StepBudget::Bounded(t) => {
                    assert!(t >= 1, "budget collapsed at G = {g}, q_a = {q_a}");
                    assert!(min_success_probability(g, t, 2, LogBase::Natural).unwrap() <= bar);
                    assert!(
                        min_success_probability(g, t + 1, 2, LogBase::Natural).unwrap() > bar
                    );
                }
                StepBudget::Unbounded => panic!("positive ancilla width must bound the march"),
            }
        }
    }

    c.pass();
}

#[test]
fn criterion_7_coarse_graining() {
    let c = Criterion::start(
        7,
        "B=1 error exactly 0, P·R = I to 1e-12, hybrid ≤ all-coarse with linear beating injection",
        Duration::from_secs(60),
    );

    let model = LatticeModel::d1q3();
    let methods = [
        ReconstructMethod::Inject,
        ReconstructMethod::Linear,
        ReconstructMethod::LeastSquares,
    ];

    // Degenerate block size: the coarse march is the fine march.
    let initial = FlowState::sine_wave(&model, 32, 1e-2, 0.05).unwrap();
    for method in methods {
        let pair = CoarseGrainPair::new(32, 1, method).unwrap();
        let report = coarse_grain_error(&model, &pair, 1.0, &initial, 8).unwrap();
        assert_eq!(report.error, 0.0);
    }

    // Reconstruction is an exact right inverse of projection.
    for (fine, block) in [(64, 2), (64, 4), (60, 3)] {
        for method in methods {
            let pair = CoarseGrainPair::new(fine, block, method).unwrap();
            let product = pair.projector().to_dense() * pair.reconstructor().to_dense();
            let coarse = fine / block;
            for r in 0..coarse {
                for col in 0..coarse {
                    let target = if r == col { 1.0 } else { 0.0 };
                    assert!(
                        (product[(r, col)] - target).abs() <= 1e-12,
                        "P·R off at ({r},{col}) for {} block {block}",
                        method.label()
                    );
                }
            }
        }
    }

    // Fixed sine scenario: 64 fine sites, block 2, 40 fine steps.
    let initial = FlowState::sine_wave(&model, 64, 1e-2, 0.05).unwrap();
    let mut coarse_errors = BTreeMap::new();
    for method in [ReconstructMethod::Inject, ReconstructMethod::Linear] {
        let pair = CoarseGrainPair::new(64, 2, method).unwrap();
        let all_coarse = coarse_grain_error(&model, &pair, 1.0, &initial, 40).unwrap();
        coarse_errors.insert(method.label(), all_coarse.error);

        let params = MultiscaleParams {
            method,
            ..MultiscaleParams::default()
        };
        assert_eq!(params.fine_sites, 64);
        assert_eq!(params.block, 2);
        assert_eq!(params.cycles * (params.coarse_stretch + params.fine_stretch), 40);
        let run = multiscale_run(&params).unwrap();
        assert!(
            run.hybrid_error <= run.coarse_error,
            "{}: hybrid {} vs all-coarse {}",
            method.label(),
            run.hybrid_error,
            run.coarse_error
        );
        if method == ReconstructMethod::Linear {
            assert!(run.hybrid_error < coarse_errors["inject"]);
        }
    }
    assert!(
        coarse_errors["linear"] < coarse_errors["inject"],
        "linear reconstruction must beat injection: {coarse_errors:?}"
    );

    c.pass();
}

#[test]
fn criterion_8_byte_identical_runs() {
    let c = Criterion::start(
        8,
        "every command, run twice with the same seed, emits byte-identical CSV",
        Duration::from_secs(300),
    );

    let bin = env!("CARGO_BIN_EXE_clb");
    for command in clb::run::COMMANDS {
        let invoke = || {
            let output = Command::new(bin)
                .args([command, "--seed", "123"])
                .output()
                .expect("binary must launch");
            assert!(
                output.status.success(),
                "{command} failed: {}",
                String::from_utf8_lossy(&output.stderr)
            );
            assert!(!output.stdout.is_empty());
            output.stdout
        };
        let first = invoke();
        let second = invoke();
        assert_eq!(first, second, "{command} output drifted between runs");
        let text = String::from_utf8(first).expect("CSV must be UTF-8");
        assert!(text.starts_with(&format!("# command: {command}\n")));
        assert!(text.contains("seed=123"));
        Table::from_csv(&text).expect("artifact must parse back");
    }

    c.pass();
}
