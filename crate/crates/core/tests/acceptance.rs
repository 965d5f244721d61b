//! Acceptance suite. Runs every criterion at full scale, prints one line
//! per criterion and exits nonzero if any fails.
//!
//! Each criterion runs the library's own check and, where one exists, a
//! second reference computed here from first principles.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use equitynet::equilibrium::solve_equilibrium;
use equitynet::network::{circle_without_opposites, three_agent};
use equitynet::objective::{optimize, Objective};
use equitynet::verify::{self, CheckOutcome, VerifyConfig};
use equitynet::{random, SuccessModel, WeightedNetwork};

const SEED: u64 = 20_240_601;

struct Line {
    label: String,
    passed: bool,
    detail: String,
}

fn from_checks(label: &str, checks: &[CheckOutcome], extra: Vec<(bool, String)>) -> Line {
    let mut passed = checks.iter().all(|c| c.passed);
    let mut parts: Vec<String> = checks
        .iter()
        .map(|c| format!("[{} {}: {}]", if c.passed { "ok" } else { "FAILED" }, c.name, c.detail))
        .collect();
    for (ok, text) in extra {
        passed &= ok;
        parts.push(format!("[{} {text}]", if ok { "ok" } else { "FAILED" }));
    }
    Line {
        label: label.into(),
        passed,
        detail: parts.join(" "),
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

/// FOC residual recomputed from the raw definition: `a_i` against
/// `P'(Y) sigma_i (1 + beta sum_j G_ij a_j)`.
fn independent_foc() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 0xF0C);
    let mut worst = 0.0f64;
    let mut solved = 0;
    for case in 0..200 {
        let n = rng.random_range(2..=8);
        let net = random::weighted_network(&mut rng, n, 0.6);
        let alloc = random::allocation(&mut rng, n, 0.2);
        let model = verify::random_model(&mut rng, case % 2 == 0);
        let Ok(eq) = solve_equilibrium(&net, &model, &alloc) else {
            continue;
        };
        solved += 1;
        let g = net.weights();
        let a = &eq.actions;
        let mut y = a.iter().sum::<f64>();
        for i in 0..n {
            for j in 0..n {
                y += 0.5 * model.beta() * g[(i, j)] * a[i] * a[j];
            }
        }
        let slope = model.deriv(y).unwrap();
        for i in 0..n {
            let ga: f64 = (0..n).map(|j| g[(i, j)] * a[j]).sum();
            worst = worst.max((a[i] - slope * alloc.shares()[i] * (1.0 + model.beta() * ga)).abs());
        }
    }
    (
        worst <= 1e-10,
        format!("independent FOC on {solved} solvable draws: {worst:.2e}"),
    )
}

/// Clique number by exhaustive subset check.
fn clique_number(net: &WeightedNetwork) -> usize {
    let n = net.n();
    (1u32..1 << n)
        .filter(|m| {
            let v: Vec<usize> = (0..n).filter(|i| m >> i & 1 == 1).collect();
            v.iter().all(|&i| v.iter().all(|&j| i == j || net.weight(i, j) > 0.0))
        })
        .map(|m| m.count_ones() as usize)
        .max()
        .unwrap_or(0)
}

fn independent_cliques() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 0xC11);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n = rng.random_range(3..=10);
        let net = random::unweighted_network(&mut rng, n, 0.5);
        let k = clique_number(&net) as f64;
        let model = SuccessModel::linear(0.5, 0.1).unwrap();
        let c = optimize(&net, &model, Objective::SuccessProbability).unwrap().c;
        worst = worst.max((c - (k - 1.0) / k).abs());
    }
    let ex2 = optimize(
        &circle_without_opposites(10),
        &SuccessModel::linear(0.5, 0.1).unwrap(),
        Objective::SuccessProbability,
    )
    .unwrap();
    let ok = worst <= 1e-12 && (ex2.c - 0.8).abs() <= 1e-12 && ex2.ties.len() >= 33;
    (
        ok,
        format!(
            "subset clique oracle gap {worst:.2e}; circulant c={:.15}, {} tied supports",
            ex2.c,
            ex2.ties.len()
        ),
    )
}

/// Three-agent shares from the defining balance equations, solved here
/// with a dense solve.
fn independent_three_agent() -> (bool, String) {
    let model = SuccessModel::linear(0.9, 0.1).unwrap();
    let mut worst = 0.0f64;
    for &(a, b) in &[(0.8, 0.6), (0.9, 0.3), (0.7, 0.7), (1.0, 0.05), (0.6, 0.45)] {
        let net = three_agent(a, b).unwrap();
        let got = optimize(&net, &model, Objective::SuccessProbability).unwrap();
        let w = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, a, 1.0, 0.0, b, a, b, 0.0]);
        let x = w.lu().solve(&DVector::from_element(3, 1.0)).unwrap();
        let expected: Vec<f64> = if x.iter().all(|&v| v > 0.0) {
            x.iter().map(|v| v / x.sum()).collect()
        } else {
            vec![0.5, 0.5, 0.0]
        };
        for i in 0..3 {
            worst = worst.max((got.allocation.shares()[i] - expected[i]).abs());
        }
    }
    (worst <= 1e-12, format!("dense-solve reference gap {worst:.2e}"))
}

/// The cubic root found by Newton's method from 1 rather than bisection.
fn independent_cubic() -> (bool, String) {
    let net = WeightedNetwork::from_edges(2, &[(0, 1, 1.0)]).unwrap();
    let (alpha, k) = (0.5, 2.0);
    let mut worst = 0.0f64;
    for i in 1..=20 {
        let beta = i as f64 * 0.1;
        let ba = beta * alpha;
        let p = |s: f64| -ba * ba * s.powi(3) + 3.0 * ba * k * s * s - 4.0 * k * k * s + 2.0 * k * k;
        let dp = |s: f64| -3.0 * ba * ba * s * s + 6.0 * ba * k * s - 4.0 * k * k;
        let mut s = 0.5;
        for _ in 0..100 {
            s -= p(s) / dp(s);
        }
        let model = SuccessModel::linear(alpha, beta).unwrap();
        let got = optimize(&net, &model, Objective::ResidualProfit).unwrap().s_star;
        worst = worst.max((got - s).abs());
    }
    (
        worst <= 1e-8,
        format!("Newton cubic vs optimizer on a pair, 20 betas: {worst:.2e}"),
    )
}

/// `rho(Sigma G)` from the full complex spectrum.
fn independent_spectrum() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 0x5EC);
    let model = SuccessModel::linear(0.5, 0.1).unwrap();
    let mut worst = 0.0f64;
    let mut margin = f64::INFINITY;
    for _ in 0..10 {
        let n = rng.random_range(2..=8);
        let net = random::weighted_network(&mut rng, n, 0.6);
        let contract = optimize(&net, &model, Objective::SuccessProbability).unwrap();
        let rho = |s: &[f64]| {
            let m = DMatrix::from_diagonal(&DVector::from_column_slice(s)) * net.weights();
            m.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
        };
        let rho_star = rho(contract.allocation.shares());
        worst = worst.max((rho_star - contract.c).abs());
        for _ in 0..500 {
            margin = margin.min(rho_star - rho(&random::simplex_point(&mut rng, n)));
        }
    }
    (
        worst <= 1e-9 && margin >= -1e-9,
        format!("complex-spectrum |rho* - c| {worst:.2e}, margin {margin:.3e}"),
    )
}

fn main() -> ExitCode {
    let cfg = VerifyConfig::full(SEED);
    let mut lines = Vec::new();

    let (c1, t1) = timed(|| verify::check_equilibrium(&cfg));
    lines.push(from_checks(
        "1 equilibrium correctness",
        &[c1],
        vec![
            independent_foc(),
            (
                t1 < Duration::from_secs(10),
                format!("runtime {:.2}s < 10s", t1.as_secs_f64()),
            ),
        ],
    ));

    lines.push(from_checks("2 balanced equity", &[verify::check_balance(&cfg)], vec![]));
    lines.push(from_checks(
        "3 pruned search vs enumeration",
        &[verify::check_extensive(&cfg)],
        vec![],
    ));
    lines.push(from_checks(
        "4 maximum clique",
        &[verify::check_cliques(&cfg)],
        vec![independent_cliques()],
    ));
    lines.push(from_checks(
        "5 three-agent network",
        &[verify::check_three_agent(&cfg)],
        vec![independent_three_agent()],
    ));
    lines.push(from_checks(
        "6 figure-2 shape",
        &[verify::check_figure_two(&cfg)],
        vec![],
    ));
    lines.push(from_checks(
        "7 comparative statics",
        &[
            verify::check_share_derivative(&cfg),
            verify::check_performance_derivative(&cfg),
            verify::check_total_share(&cfg),
        ],
        vec![independent_cubic()],
    ));
    lines.push(from_checks(
        "8 beta invariance",
        &[verify::check_beta_invariance(&cfg)],
        vec![],
    ));

    let (c9, t9) = timed(|| verify::check_spectral_certificate(&cfg));
    lines.push(from_checks(
        "9 spectral radius certificate",
        &[c9],
        vec![
            independent_spectrum(),
            (
                t9 < Duration::from_secs(30),
                format!("runtime {:.2}s < 30s", t9.as_secs_f64()),
            ),
        ],
    ));

    let mut failed = 0;
    for l in &lines {
        println!(
            "{} criterion {}: {}",
            if l.passed { "PASS" } else { "FAIL" },
            l.label,
            l.detail
        );
        failed += usize::from(!l.passed);
    }
    println!("{} of {} criteria passed", lines.len() - failed, lines.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
