//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines are always visible. The
//! process fails when a criterion fails that is not listed in
//! `EXPECTED_FAIL`; expected failures still print `FAIL` with their numbers.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use varprop_core::bench::{run_bench, BenchConfig};
use varprop_core::downfold::{
    block_coupling, downfold_coefficients, effective_hamiltonian, first_order_remainder, solve_generator,
    standard_second_order, super_moments, TAYLOR_COEFFICIENTS,
};
use varprop_core::ensemble::gue;
use varprop_core::models::graphene::{
    convention_check, low_energy_basis, printed_coefficients as graphene_coefficients, printed_generator,
    printed_h2_var, super_trace,
};
use varprop_core::models::hubbard::{
    heisenberg_models, improvement_factor, printed_coefficients as hubbard_printed, printed_generator as hubbard_o,
    singly_occupied_basis, GeneratorMoments,
};
use varprop_core::models::{
    graphene_hamiltonians, graphene_sweep, hubbard_hamiltonian, hubbard_sweep, open_linear_grid, Boundary,
    FockBasis, GrapheneParams, HubbardParams, HubbardSweepConfig, MomentumAxis, PmConvention,
};
use varprop_core::ode::OdeSolverConfig;
use varprop_core::propagator::{variational_propagator, ClosedFormTerms};
use varprop_core::spectral::{exact_propagator, l2_distance, moments, operator_norm};
use varprop_core::{CMatrix, HermitianOperator, Method, C64};

/// Criteria whose failure is understood and recorded; see the README.
const EXPECTED_FAIL: &[usize] = &[3, 5, 7];

type Criterion = (usize, &'static str, fn() -> Outcome, Duration);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |a, x| a.max(x.norm()))
}

/// Deterministic well-spread points in `(0, 1)`.
fn golden(k: usize) -> f64 {
    ((k as f64 + 1.0) * 0.618_033_988_749_894_9).fract()
}

fn cayley_hamilton() -> Outcome {
    let cfg = OdeSolverConfig::default();
    let mut worst = 0.0f64;
    for d in [2, 3] {
        for s in 0..100 {
            let h = gue(d, 1001, s);
            let norm = operator_norm(&h);
            let times: Vec<f64> = (0..=100).map(|k| 0.02 * k as f64 / norm).collect();
            let approx = variational_propagator(&h, &times, 2, &cfg).expect("solver");
            for (u, &t) in approx.iter().zip(&times) {
                worst = worst.max(l2_distance(u, &exact_propagator(&h, t).unwrap()).unwrap());
            }
        }
    }
    outcome(worst <= 1e-7, format!("max l2 over 200 matrices = {worst:.2e} (limit 1e-7)"))
}

fn ensemble_ordering() -> Outcome {
    let cfg = BenchConfig {
        dims: vec![5, 500],
        samples: 100,
        seed: 42,
        methods: vec![Method::Taylor, Method::Variational],
        ..Default::default()
    };
    let recs = run_bench(&cfg).expect("bench");
    let curve = |m, d| -> Vec<(f64, f64)> {
        recs.iter().filter(|r| r.method == m && r.dim == d).map(|r| (r.t_norm, r.l2_mean)).collect()
    };
    let mut ordering_ok = true;
    let mut worst_margin = f64::INFINITY;
    for d in [5, 500] {
        for ((t, ty), (_, var)) in curve(Method::Taylor, d).into_iter().zip(curve(Method::Variational, d)) {
            if t >= 0.2 - 1e-12 {
                ordering_ok &= var <= ty;
                worst_margin = worst_margin.min(ty - var);
            }
        }
    }
    let gap = curve(Method::Variational, 5)
        .iter()
        .zip(curve(Method::Variational, 500))
        .map(|(a, b)| (a.1 - b.1).abs())
        .fold(0.0, f64::max);
    outcome(
        ordering_ok && gap <= 0.05,
        format!("variational <= taylor on [0.2, 2]: {ordering_ok} (min margin {worst_margin:.3e}); max |d5 - d500| = {gap:.4} (limit 0.05)"),
    )
}

fn closed_form_fidelity() -> Outcome {
    let sigma1 = HermitianOperator::from_real(&nalgebra::DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap();
    let terms = ClosedFormTerms::from_moments(&moments(&sigma1, 4)).unwrap();
    let want = [C64::new(0.0, 1.0 / 6.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0 / 24.0, 0.0)];
    let got = [terms.c13, terms.c14, terms.c23, terms.c24];
    let sigma_ok = got.iter().zip(&want).all(|(a, b)| (a - b).norm() <= 1e-15);

    let cfg = BenchConfig {
        dims: vec![5],
        samples: 100,
        seed: 42,
        methods: vec![Method::VariationalClosedForm],
        reference: Method::Variational,
        ..Default::default()
    };
    let recs = run_bench(&cfg).expect("bench");
    let worst = recs.iter().map(|r| r.l2_mean).fold(0.0, f64::max);
    let first_bad = recs.iter().find(|r| r.l2_mean > 0.05).map(|r| r.t_norm);
    outcome(
        sigma_ok && worst <= 0.05,
        format!(
            "sigma1 terms exact: {sigma_ok}; max mean l2(closed form, ODE) = {worst:.4} (limit 0.05){}",
            first_bad.map(|t| format!(", exceeded from t|H| = {t:.3}")).unwrap_or_default()
        ),
    )
}

fn graphene_identity() -> Outcome {
    let ode = OdeSolverConfig::default();
    let mut coeff_err = 0.0f64;
    let mut ham_err = 0.0f64;
    for k in 0..50 {
        let x = 2.0 * (k + 1) as f64 / 50.0;
        let p = GrapheneParams::new(1.0, 0.0, x, PmConvention::Complex).unwrap();
        let split = graphene_hamiltonians(&p);
        let gen = solve_generator(&split).unwrap();
        let c = downfold_coefficients(&super_moments(&gen.o, 6), &ode).unwrap();
        let want = graphene_coefficients(x);
        coeff_err = coeff_err.max((c[1] - want[1]).norm()).max((c[2] - want[2]).norm());

        // Random direction and magnitude for the matrix identity.
        let r = 2.0 * (1.0 - golden(2 * k));
        let th = std::f64::consts::TAU * golden(2 * k + 1);
        let p = GrapheneParams::new(1.0, r * th.cos(), r * th.sin(), PmConvention::Complex).unwrap();
        let split = graphene_hamiltonians(&p);
        let gen = solve_generator(&split).unwrap();
        let c = downfold_coefficients(&super_moments(&gen.o, 6), &ode).unwrap();
        let res = effective_hamiltonian(&split, &gen, c, &low_energy_basis()).unwrap();
        ham_err = ham_err.max(max_abs(&(res.h_effective.matrix() - printed_h2_var(&p))));
    }
    outcome(
        coeff_err <= 1e-8 && ham_err <= 1e-9,
        format!("max coefficient error {coeff_err:.2e} (limit 1e-8); max |H_eff - H_var| {ham_err:.2e} (limit 1e-9)"),
    )
}

fn graphene_window() -> Outcome {
    let printed = convention_check(1.0, 0.1, 7, PmConvention::AsPrinted).unwrap();
    let complex = convention_check(1.0, 0.1, 7, PmConvention::Complex).unwrap();
    let conv = if complex.max_relative_mismatch < printed.max_relative_mismatch {
        PmConvention::Complex
    } else {
        PmConvention::AsPrinted
    };
    let sweep = graphene_sweep(1.0, &open_linear_grid(2.0, 200), conv, MomentumAxis::P2).unwrap();
    let pts = sweep.per_momentum();
    let (mut best, mut run, mut best_end) = (0usize, 0usize, 0usize);
    for (i, p) in pts.iter().enumerate() {
        run = if p.2 < p.1 { run + 1 } else { 0 };
        if run > best {
            best = run;
            best_end = i;
        }
    }
    let window = &pts[best_end + 1 - best..=best_end];
    let min_ratio = window.iter().map(|p| p.2 / p.1).fold(f64::INFINITY, f64::min);
    let coverage = best as f64 / pts.len() as f64;
    let better = pts.iter().filter(|p| p.2 < p.1).count() as f64 / pts.len() as f64;
    outcome(
        coverage >= 0.8 && min_ratio <= 1e-2,
        format!(
            "convention {}; longest window var < std: p/gamma in [{:.2}, {:.2}] = {:.0}% of (0, 2] (need 80%, var better on {:.0}% overall); min ratio {min_ratio:.1e} (limit 1e-2)",
            conv.tag(),
            window[0].0,
            window[window.len() - 1].0,
            100.0 * coverage,
            100.0 * better
        ),
    )
}

fn generator_equivalence() -> Outcome {
    let mut o_err = 0.0f64;
    let mut residual = 0.0f64;
    for (p1, p2) in [(0.2, 0.1), (-0.7, 0.3), (1.1, -1.4)] {
        let p = GrapheneParams::new(1.0, p1, p2, PmConvention::AsPrinted).unwrap();
        let split = graphene_hamiltonians(&p);
        let gen = solve_generator(&split).unwrap();
        o_err = o_err.max(max_abs(&(gen.o.matrix() - printed_generator(&p).matrix())));
        let r = block_coupling(&first_order_remainder(&split, &gen), &low_energy_basis());
        residual = residual.max(r / split.v.frobenius_norm());
    }
    for n in 2..=4 {
        let basis = FockBasis::full(n).unwrap();
        let p = HubbardParams::new(n, 0.15, 1.0, Boundary::Periodic).unwrap();
        let split = hubbard_hamiltonian(&basis, &p).unwrap();
        let gen = solve_generator(&split).unwrap();
        o_err = o_err.max(max_abs(&(gen.o.matrix() - hubbard_o(&basis, &p).unwrap().matrix())));
        let r = block_coupling(&first_order_remainder(&split, &gen), &singly_occupied_basis(&basis).unwrap());
        residual = residual.max(r / split.v.frobenius_norm());
    }
    outcome(
        o_err <= 1e-10 && residual <= 1e-9,
        format!("max |O_numeric - O_printed| {o_err:.2e} (limit 1e-10); max relative decoupling residual {residual:.2e} (limit 1e-9)"),
    )
}

fn hubbard_ordering() -> Outcome {
    let cfg = HubbardSweepConfig::default();
    let sweep = hubbard_sweep(&cfg).unwrap();
    let levels_ok = sweep.points.iter().all(|p| p.levels.len() == 26);
    let bad: Vec<f64> =
        sweep.points.iter().filter(|p| p.first_half_var >= p.first_half_std).map(|p| p.t_over_u).collect();
    let bad_flagged = sweep.points.iter().filter(|p| p.first_half_var >= p.first_half_std && p.flagged).count();
    let upper_worse = sweep.points.iter().filter(|p| p.upper_half_var > p.upper_half_std).count();
    let first = bad.first().map(|t| format!(" from t/U = {t:.3}")).unwrap_or_default();
    outcome(
        levels_ok && bad.is_empty(),
        format!(
            "26 non-zero levels: {levels_ok}; first-13 average var < std at {}/{} points of [0.01, 0.5] (fails{first}, {bad_flagged} of those flagged); upper half worse for var at {upper_worse} points",
            sweep.points.len() - bad.len(),
            sweep.points.len(),
        ),
    )
}

fn limits() -> Outcome {
    let ode = OdeSolverConfig::default();
    let mut dev = 0.0f64;
    // Graphene at p/γ = 1e-4 through the generic route.
    let p = GrapheneParams::new(1.0, 0.0, 1e-4, PmConvention::Complex).unwrap();
    let split = graphene_hamiltonians(&p);
    let gen = solve_generator(&split).unwrap();
    let c = downfold_coefficients(&super_moments(&gen.o, 6), &ode).unwrap();
    for (a, b) in c.iter().zip(TAYLOR_COEFFICIENTS) {
        dev = dev.max((a - b).norm() / b.norm());
    }
    let basis = low_energy_basis();
    let std = standard_second_order(&split, &gen, &basis).unwrap();
    let var = effective_hamiltonian(&split, &gen, c, &basis).unwrap();
    let coupling_g = max_abs(&(var.h_effective.matrix() - std.matrix())) / max_abs(std.matrix());
    dev = dev.max(coupling_g);

    // Hubbard at t/U = 1e-4, printed and ODE coefficients.
    let hp = HubbardParams::new(5, 1e-4, 1.0, Boundary::Periodic).unwrap();
    let (c1, c2) = hubbard_printed(&hp);
    let (o1, o2) = GeneratorMoments::new(5, Boundary::Periodic).unwrap().coefficients(1e-4, &ode).unwrap();
    for (a, b) in [(c1, C64::new(0.0, -1.0)), (c2, C64::new(-0.5, 0.0)), (o1, C64::new(0.0, -1.0)), (o2, C64::new(-0.5, 0.0))] {
        dev = dev.max((a - b).norm() / b.norm());
    }
    let (h_std, h_var) = heisenberg_models(&hp, c1, c2);
    let coupling_h = max_abs(&(h_var.matrix() - h_std.matrix())) / max_abs(h_std.matrix());
    dev = dev.max(coupling_h);
    let factor = improvement_factor(c1, c2);
    // Spin state 1 has two antiparallel bonds, 2 per ordered pair: diagonal 8·(−t²/2U).
    let j = h_std.matrix()[(1, 1)].re / 8.0;
    let heis = ((j - (-1e-8 / 2.0)) / (1e-8 / 2.0)).abs();
    dev = dev.max(heis);
    outcome(
        dev <= 1e-6,
        format!("max relative deviation {dev:.2e} at scale 1e-4 (limit 1e-6); ic1 + c2 = {factor:.10}"),
    )
}

fn moment_oracle() -> Outcome {
    let mut worst = 0.0f64;
    for d in 1..=8 {
        let o = gue(d, 77, d as u64);
        let fast = super_moments(&o, 6);
        let brute = kronecker_traces(o.matrix(), 6);
        for n in 0..=6 {
            // Odd orders vanish, so measure them against the even-moment scale.
            let scale = brute[2].powf(n as f64 / 2.0).max(1e-300);
            worst = worst.max((fast.moments.get(n) - brute[n]).abs() / scale);
        }
    }
    let mut graphene = 0.0f64;
    for x in [0.1, 0.37, 1.3] {
        let p = GrapheneParams::new(1.0, 0.6 * x, 0.8 * x, PmConvention::AsPrinted).unwrap();
        let brute = kronecker_traces(printed_generator(&p).matrix(), 6);
        for n in 0..=6 {
            let raw = 16.0 * brute[n];
            let want = super_trace(x, n);
            // The printed formula 2^{n+2}[(p/γ)ⁿ + (−p/γ)ⁿ] read as tr(Õⁿ).
            let printed = 2f64.powi(n as i32 + 2) * (x.powi(n as i32) + (-x).powi(n as i32));
            let scale = want.abs().max(1.0);
            graphene = graphene.max((raw - want).abs() / scale);
            // That form drops the eight zero eigenvalues, so it only holds from n = 1.
            if n >= 1 {
                graphene = graphene.max((printed - want).abs() / scale);
            }
        }
    }
    outcome(
        worst <= 1e-10 && graphene <= 1e-10,
        format!("D <= 8, n <= 6 relative error {worst:.2e}; graphene 16x16 traces vs closed form {graphene:.2e} (limit 1e-10)"),
    )
}

/// `tr(Õⁿ)/D²` from the explicit `D² × D²` superoperator.
fn kronecker_traces(o: &CMatrix, max_order: usize) -> Vec<f64> {
    let d = o.nrows();
    let id = CMatrix::identity(d, d);
    let sup = o.kronecker(&id) - id.kronecker(&o.transpose());
    let mut p = CMatrix::identity(d * d, d * d);
    (0..=max_order)
        .map(|_| {
            let tr = p.trace().re / (d * d) as f64;
            p = &p * &sup;
            tr
        })
        .collect()
}

fn run_cli(dir: &Path, args: &[&str], threads: &str) -> bool {
    Command::new(env!("CARGO_BIN_EXE_varprop"))
        .args(args)
        .current_dir(dir)
        .env("VARPROP_THREADS", threads)
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn determinism() -> Outcome {
    let runs: [(&str, Vec<&str>); 4] = [
        ("bench.csv", vec!["bench-evolution", "--seed", "9", "--samples", "6", "--dims", "4,30", "--points", "21", "--out", "bench.csv", "--svg", "bench.svg"]),
        ("graphene.csv", vec!["graphene", "--points", "60", "--out", "graphene.csv", "--svg", "graphene.svg"]),
        ("hubbard.csv", vec!["hubbard", "--sites", "4", "--points", "6", "--coeffs", "ode", "--out", "hubbard.csv", "--svg", "hubbard.svg"]),
        ("plot.svg", vec!["plot", "--input", "bench.csv", "--output", "plot.svg"]),
    ];
    let mut snapshots = Vec::new();
    for threads in ["1", "4", "4"] {
        let dir = tempfile::tempdir().unwrap();
        for (_, args) in &runs {
            if !run_cli(dir.path(), args, threads) {
                return outcome(false, format!("command {args:?} failed"));
            }
        }
        let mut files: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().path()).collect();
        files.sort();
        snapshots.push(files.iter().map(|f| (f.file_name().unwrap().to_owned(), std::fs::read(f).unwrap())).collect::<Vec<_>>());
    }
    let same = snapshots.windows(2).all(|w| w[0] == w[1]);
    outcome(
        same,
        format!("{} output files byte-identical across runs with 1 and 4 threads: {same}", snapshots[0].len()),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "variational exactness for d <= 3", cayley_hamilton, Duration::from_secs(10)),
        (2, "ensemble ordering and dimension independence", ensemble_ordering, Duration::from_secs(300)),
        (3, "closed-form coefficients", closed_form_fidelity, Duration::from_secs(300)),
        (4, "graphene coefficient identity", graphene_identity, Duration::from_secs(5)),
        (5, "graphene mismatch sweep", graphene_window, Duration::from_secs(10)),
        (6, "generator equivalences", generator_equivalence, Duration::from_secs(60)),
        (7, "Hubbard t/U sweep", hubbard_ordering, Duration::from_secs(120)),
        (8, "perturbative limits", limits, Duration::from_secs(60)),
        (9, "superoperator moment oracle", moment_oracle, Duration::from_secs(60)),
        (10, "CLI determinism", determinism, Duration::from_secs(300)),
    ];
    let mut unexpected = 0;
    for (id, name, f, limit) in criteria {
        let start = Instant::now();
        let o = catch_unwind(AssertUnwindSafe(f))
            .unwrap_or_else(|e| outcome(false, format!("panicked: {:?}", e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())))));
        let elapsed = start.elapsed();
        let in_time = elapsed <= limit;
        let pass = o.pass && in_time;
        let expected = EXPECTED_FAIL.contains(&id);
        let status = match (pass, expected) {
            (true, _) => "PASS",
            (false, true) => "FAIL (expected)",
            (false, false) => "FAIL",
        };
        if !pass && !expected {
            unexpected += 1;
        }
        let timing = if in_time {
            format!("{:.1}s", elapsed.as_secs_f64())
        } else {
            format!("{:.1}s exceeds {}s", elapsed.as_secs_f64(), limit.as_secs())
        };
        println!("criterion {id:>2} {status}: {name}: {} [{timing}]", o.detail);
    }
    if unexpected > 0 {
        println!("{unexpected} unexpected failure(s)");
        std::process::exit(1);
    }
}
