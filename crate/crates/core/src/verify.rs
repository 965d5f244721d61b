//! The verification suite: randomized and closed-form checks of every
//! solver, at a configurable scale.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::compstat::{
    central_difference, d_performance_d_weight, d_shares_d_weight, ratio_derivative, LinkPerturbation,
};
use crate::equilibrium::{bonacich_diagnostics, solve_equilibrium, verify_nash, EquilibriumResult, EquityAllocation};
use crate::extensive::{brute_force_oracle, search_active_set, SearchOptions};
use crate::intensive::{allocate_on_set, predicted_equilibrium};
use crate::network::{circle_without_opposites, three_agent, AgentSet, WeightedNetwork};
use crate::objective::{optimize, rp_grid_excess, rp_linear_closed_form, Objective, OptimalContract};
use crate::oracles::{g_star, spectral_radius_certificate, three_agent_contract, ThreeAgentSpec};
use crate::roots::bisect;
use crate::success::SuccessModel;
use crate::sweep::{sweep, SweepParam};
use crate::{random, Error, Result};

/// Sizes of the randomized batches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct VerifyConfig {
    pub seed: u64,
    pub equilibrium_cases: usize,
    pub nash_grid: usize,
    pub balance_cases: usize,
    pub rp_grid_points: usize,
    pub extensive_cases: usize,
    pub clique_cases: usize,
    pub share_derivative_cases: usize,
    pub invariance_cases: usize,
    pub certificate_contracts: usize,
    pub certificate_trials: usize,
}

impl VerifyConfig {
    /// Batch sizes of the acceptance criteria.
    pub fn full(seed: u64) -> Self {
        VerifyConfig {
            seed,
            equilibrium_cases: 200,
            nash_grid: 400,
            balance_cases: 100,
            rp_grid_points: 1000,
            extensive_cases: 500,
            clique_cases: 200,
            share_derivative_cases: 50,
            invariance_cases: 20,
            certificate_contracts: 20,
            certificate_trials: 10_000,
        }
    }

    /// Smaller batches for interactive runs.
    pub fn desk(seed: u64) -> Self {
        VerifyConfig {
            seed,
            equilibrium_cases: 40,
            nash_grid: 200,
            balance_cases: 20,
            rp_grid_points: 200,
            extensive_cases: 100,
            clique_cases: 40,
            share_derivative_cases: 10,
            invariance_cases: 5,
            certificate_contracts: 5,
            certificate_trials: 2_000,
        }
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

/// Signature of `d_performance_d_weight`, replaceable to test the checker.
pub type PerformanceDerivative = fn(&SuccessModel, &OptimalContract, usize, usize) -> Result<f64>;

fn outcome(name: &'static str, start: Instant, result: Result<(bool, String)>) -> CheckOutcome {
    let (passed, detail) = result.unwrap_or_else(|e| (false, format!("error: {e}")));
    CheckOutcome {
        name,
        passed,
        detail,
        elapsed: start.elapsed(),
    }
}

/// Random model from either family; `linear` picks the family.
pub fn random_model<R: Rng>(rng: &mut R, linear: bool) -> SuccessModel {
    if linear {
        SuccessModel::linear(rng.random_range(0.3..0.9), rng.random_range(0.05..0.5)).expect("valid range")
    } else {
        SuccessModel::saturating(
            rng.random_range(0.5..0.95),
            rng.random_range(0.5..3.0),
            rng.random_range(0.05..1.0),
        )
        .expect("valid range")
    }
}

fn model_failure(e: &Error) -> bool {
    matches!(
        e,
        Error::NoEquilibriumLinearP(_) | Error::KinkReached(_) | Error::SpectralInfeasible | Error::NoInteriorOptimum
    )
}

/// Redraws the model until `f` succeeds, for at most 100 draws.
fn with_feasible_model<R: Rng, T>(
    rng: &mut R,
    linear: bool,
    mut f: impl FnMut(&SuccessModel) -> Result<T>,
) -> Result<(SuccessModel, T)> {
    let mut last = Error::NoConvergence("model draw");
    for _ in 0..100 {
        let model = random_model(rng, linear);
        match f(&model) {
            Ok(v) => return Ok((model, v)),
            Err(e) if model_failure(&e) => last = e,
            Err(e) => return Err(e),
        }
    }
    Err(last)
}

/// Equilibrium first-order residual and unilateral deviations on random
/// networks of up to eight agents.
pub fn check_equilibrium(cfg: &VerifyConfig) -> CheckOutcome {
    let start = Instant::now();
    let run = || -> Result<(bool, String)> {
        let mut rng = cfg.rng(1);
        let (mut worst_foc, mut worst_gain) = (0.0f64, 0.0f64);
        for case in 0..cfg.equilibrium_cases {
            let n = rng.random_range(2..=8);
            let p = rng.random_range(0.3..0.9);
            let net = random::weighted_network(&mut rng, n, p);
            let alloc = random::allocation(&mut rng, n, 0.2);
            let (model, eq) = with_feasible_model(&mut rng, case % 2 == 0, |m| solve_equilibrium(&net, m, &alloc))?;
            worst_foc = worst_foc.max(eq.foc_residual);
            worst_gain = worst_gain.max(verify_nash(&net, &model, &alloc, &eq, cfg.nash_grid));
        }
        Ok((
            worst_foc <= 1e-10 && worst_gain <= 1e-6,
            format!(
                "{} cases, max FOC residual {worst_foc:.2e}, max deviation gain {worst_gain:.2e}",
                cfg.equilibrium_cases
            ),
        ))
    };
    outcome("equilibrium correctness", start, run())
}

fn balanced_action_spread(contract: &OptimalContract, mu: f64) -> f64 {
    let s = contract.allocation.shares();
    contract
        .active_set
        .members()
        .iter()
        .map(|&i| (contract.equilibrium.actions[i] / s[i] - mu).abs() / mu)
        .fold(0.0, f64::max)
}

fn b_flatness(
    net: &WeightedNetwork,
    model: &SuccessModel,
    alloc: &EquityAllocation,
    eq: &EquilibriumResult,
    mu: f64,
) -> Result<f64> {
    let diag = bonacich_diagnostics(net, model, alloc, eq)?;
    let active = alloc.active_set();
    Ok(active
        .members()
        .iter()
        .map(|&i| (diag.b[i] - mu).abs() / mu)
        .fold(0.0, f64::max))
}

/// Balanced neighbourhood equity and proportional actions at optimized
/// contracts for both objectives.
pub fn check_balance(cfg: &VerifyConfig) -> CheckOutcome {
    let start = Instant::now();
    let run = || -> Result<(bool, String)> {
        let mut rng = cfg.rng(2);
        let (mut spread, mut ratio, mut flat, mut excess) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for case in 0..cfg.balance_cases {
            let n = rng.random_range(3..=7);
            let p = rng.random_range(0.4..0.9);
            let net = random::weighted_network(&mut rng, n, p);
            let objective = if case % 2 == 0 {
                Objective::SuccessProbability
            } else {
                Objective::ResidualProfit
            };
            let (model, contract) = with_feasible_model(&mut rng, case % 4 < 2, |m| optimize(&net, m, objective))?;
            let mu = predicted_equilibrium(&model, &contract.solution)?.mu;
            spread = spread
                .max(contract.balance.equity_spread)
                .max(contract.balance.action_spread);
            ratio = ratio.max(balanced_action_spread(&contract, mu));
            flat = flat.max(b_flatness(
                &net,
                &model,
                &contract.allocation,
                &contract.equilibrium,
                mu,
            )?);
            if objective == Objective::ResidualProfit {
                excess = excess.max(rp_grid_excess(&net, &model, &contract, cfg.rp_grid_points));
            }
        }
        Ok((
            spread <= 1e-9 && ratio <= 1e-9 && flat <= 1e-8 && excess <= 1e-9,
            format!(
                "{} contracts, max spread {spread:.2e}, a/sigma vs mu {ratio:.2e}, b flatness {flat:.2e}, RP grid excess {excess:.2e}",
                cfg.balance_cases
            ),
        ))
    };
    outcome("balanced equity", start, run())
}

/// Pruned search against exhaustive enumeration on small weighted networks.
pub fn check_extensive(cfg: &VerifyConfig) -> CheckOutcome {
    let start = Instant::now();
    let run = || -> Result<(bool, String)> {
        let mut rng = cfg.rng(3);
        let (mut gap, mut worst_diameter) = (0.0f64, 0usize);
        let mut pruned = 0;
        for _ in 0..cfg.extensive_cases {
            let n = rng.random_range(2..=6);
            let p = [0.3, 0.5, 0.7, 0.9][rng.random_range(0..4)];
            let net = random::weighted_network(&mut rng, n, p);
            let fast = search_active_set(&net, &SearchOptions::default())?;
            let slow = brute_force_oracle(&net)?;
            gap = gap.max((fast.best.c_per_unit - slow.best.c_per_unit).abs());
            pruned += fast.pruned_by_diameter;
            for set in [&fast.best.set, &slow.best.set] {
                worst_diameter = worst_diameter.max(net.diameter(set)?.unwrap_or(usize::MAX));
            }
        }
        Ok((
            gap <= 1e-9 && worst_diameter <= 2,
            format!(
                "{} networks, max |c gap| {gap:.2e}, max winner diameter {worst_diameter}, {pruned} subsets pruned",
                cfg.extensive_cases
            ),
        ))
    };
    outcome("pruned search equals enumeration", start, run())
}

/// Optimal `c` on unweighted graphs against the maximum clique, and the
/// tie structure of the circulant example.
pub fn check_cliques(cfg: &VerifyConfig) -> CheckOutcome {
    let start = Instant::now();
    let run = || -> Result<(bool, String)> {
        let mut rng = cfg.rng(4);
        let mut gap = 0.0f64;
        for _ in 0..cfg.clique_cases {
            let n = rng.random_range(3..=12);
            let p = [0.3, 0.5, 0.7][rng.random_range(0..3)];
            let net = random::unweighted_network(&mut rng, n, p);
            let k = net.max_clique()?.len() as f64;
            let best = search_active_set(&net, &SearchOptions::default())?.best.c_per_unit;
            gap = gap.max((best - (k - 1.0) / k).abs());
        }
        let net = circle_without_opposites(10);
        let r = search_active_set(&net, &SearchOptions::default())?;
        let full_tied = r
            .ties
            .iter()
            .any(|t| t.set == AgentSet::all(10) && (t.c_per_unit - 0.8).abs() <= 1e-12);
        let cliques = r
            .ties
            .iter()
            .filter(|t| t.set.len() == 5 && (t.c_per_unit - 0.8).abs() <= 1e-12)
            .count();
        Ok((
            gap <= 1e-12 && full_tied && cliques == 32,
            format!(
                "{} graphs, max |c - (k-1)/k| {gap:.2e}; circulant n=10: full set tied {full_tied}, {cliques}/32 five-cliques tied at 0.8",
                cfg.clique_cases
            ),
        ))
    };
    outcome("maximum clique optimality", start, run())
}

fn sp_shares(net: &WeightedNetwork, model: &SuccessModel) -> Result<OptimalContract> {
    optimize(net, model, Objective::SuccessProbability)
}

/// `d(sigma_a / sigma_b) / d G_23` at `(g13, g23)` from the share derivative.
pub fn three_agent_ratio_slope(g13: f64, g23: f64, a: usize, b: usize) -> Result<f64> {
    let net = three_agent(g13, g23)?;
    let model = SuccessModel::linear(0.9, 0.1)?;
    let contract = sp_shares(&net, &model)?;
    let d = d_shares_d_weight(&net, &model, &contract, LinkPerturbation::new(1, 2)?)?;
    Ok(ratio_derivative(contract.allocation.shares(), &d, a, b))
}

/// Sign change of `d(sigma_1 / sigma_2) / d G_23` on `(1 - g13, g13)`.
pub fn locate_threshold(g13: f64) -> Result<f64> {
    let lo = 1.0 - g13 + 1e-3;
    let hi = g13 - 1e-3;
    let steps = 50;
    let grid: Vec<f64> = (0..=steps).map(|k| lo + (hi - lo) * k as f64 / steps as f64).collect();
    let values = grid
        .iter()
        .map(|&g| three_agent_ratio_slope(g13, g, 0, 1))
        .collect::<Result<Vec<_>>>()?;
    let changes: Vec<usize> = (0..steps)
        .filter(|&k| values[k].signum() != values[k + 1].signum())
        .collect();
    if changes.len() != 1 {
        return Err(Error::NoConvergence("threshold sign changes"));
    }
    let k = changes[0];
    bisect(|g| three_agent_ratio_slope(g13, g, 0, 1), grid[k], grid[k + 1])
}

/// The three-agent closed form over a grid, the exact support switch, the
/// threshold location and the derivative signs around it.
pub fn check_three_agent(_cfg: &VerifyConfig) -> CheckOutcome {
    let start = Instant::now();
    let run = || -> Result<(bool, String)> {
        let model = SuccessModel::linear(0.9, 0.1)?;
        let mut gap = 0.0f64;
        for i in 1..=20 {
            let g13 = i as f64 / 20.0;
            for j in 1..=20 {
                let g23 = g13 * j as f64 / 20.0;
                let oracle = three_agent_contract(ThreeAgentSpec::new(g13, g23)?, 1.0)?;
                let got = sp_shares(&three_agent(g13, g23)?, &model)?;
                gap = gap.max((got.c - oracle.c).abs());
                for k in 0..3 {
                    gap = gap.max((got.allocation.shares()[k] - oracle.shares[k]).abs());
                }
            }
        }

        let mut switch_ok = true;
        for g13 in [0.55, 0.65, 0.8, 0.95] {
            let delta = 1e-5;
            let below = three_agent(g13, 1.0 - g13 - delta)?;
            let above = three_agent(g13, 1.0 - g13 + delta)?;
            let pair = AgentSet::new(vec![0, 1])?;
            switch_ok &= allocate_on_set(&below, &AgentSet::all(3), 1.0) == Err(Error::InvalidActiveSet);
            switch_ok &= allocate_on_set(&above, &AgentSet::all(3), 1.0)?.c > allocate_on_set(&above, &pair, 1.0)?.c;
        }

        let mut worst_threshold = 0.0f64;
        for g13 in [0.6, 0.7, 0.8, 0.9] {
            worst_threshold = worst_threshold.max((locate_threshold(g13)? - g_star(g13)?).abs());
        }
        let at_08 = (locate_threshold(0.8)? - g_star(0.8)?).abs();

        let g13 = 0.8;
        let gs = g_star(g13)?;
        let mut signs_ok = true;
        for k in 0..50 {
            let g23 = 0.2 + 0.6 * (k as f64 + 0.5) / 50.0;
            signs_ok &= three_agent_ratio_slope(g13, g23, 1, 2)? < 0.0;
            signs_ok &= three_agent_ratio_slope(g13, g23, 0, 2)? < 0.0;
        }
        let share_path = |lo: f64, hi: f64, agent: usize| -> Result<bool> {
            let pts: Vec<f64> = (0..50).map(|k| lo + (hi - lo) * (k as f64 + 0.5) / 50.0).collect();
            let v = pts
                .iter()
                .map(|&g| Ok(sp_shares(&three_agent(g13, g)?, &model)?.allocation.shares()[agent]))
                .collect::<Result<Vec<_>>>()?;
            Ok(v.windows(2).all(|w| w[1] < w[0]))
        };
        let corollary = share_path(0.2, gs, 1)? && share_path(gs, 0.8, 0)?;

        Ok((
            gap <= 1e-9 && switch_ok && at_08 <= 1e-4 && worst_threshold <= 1e-4 && signs_ok && corollary,
            format!(
                "400 grid points, max gap {gap:.2e}; switch at g13+g23=1 {switch_ok}; threshold error at 0.8 {at_08:.2e} \
                 (worst over 0.6..0.9 {worst_threshold:.2e}); ratio signs {signs_ok}; share monotonicity {corollary}"
            ),
        ))
    };
    outcome("three-agent closed form", start, run())
}

fn non_monotone(v: &[f64]) -> bool {
    let up = v.windows(2).all(|w| w[1] >= w[0]);
    let down = v.windows(2).all(|w| w[1] <= w[0]);
    !up && !down
}

/// Shape of the residual-profit sweep over `G_23` at `G_13 = 0.8`.
pub fn check_figure_two(_cfg: &VerifyConfig) -> CheckOutcome {
    let start = Instant::now();
    let run = || -> Result<(bool, String)> {
        let net = three_agent(0.8, 0.5)?;
        let model = SuccessModel::linear(0.9, 0.1)?;
        let rows = sweep(
            &net,
            &model,
            Objective::ResidualProfit,
            SweepParam::Link(1, 2),
            0.25,
            0.79,
            100,
        )?;
        if rows.iter().any(|r| r.c.is_nan()) {
            return Ok((false, "sweep produced failed points".into()));
        }
        let col = |f: &dyn Fn(&crate::sweep::SweepRow) -> f64| rows.iter().map(f).collect::<Vec<_>>();
        let sigma2 = col(&|r| r.shares[1]);
        let u1 = col(&|r| r.payoffs[0]);
        let u2 = col(&|r| r.payoffs[1]);
        let argmin = sigma2
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let interior = argmin > 0 && argmin + 1 < sigma2.len();
        let ok = interior && non_monotone(&sigma2) && non_monotone(&u1) && non_monotone(&u2);
        Ok((
            ok,
            format!(
                "sigma_2 minimum at G23={:.4} (interior {interior}); U_1 non-monotone {}; U_2 non-monotone {}",
                rows[argmin].param,
                non_monotone(&u1),
                non_monotone(&u2)
            ),
        ))
    };
    outcome("figure-2 shape", start, run())
}

/// Random weighted complete network whose optimal support is everyone.
fn full_support_network<R: Rng>(rng: &mut R, n: usize) -> Result<WeightedNetwork> {
    loop {
        let net = random::weighted_network(rng, n, 1.0);
        let net = {
            let mut edges = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    edges.push((i, j, 0.5 + 0.5 * net.weight(i, j)));
                }
            }
            WeightedNetwork::from_edges(n, &edges)?
        };
        if search_active_set(&net, &SearchOptions::default())?.best.set.len() == n {
            return Ok(net);
        }
    }
}

/// Share derivative in a link against differences of the optimizer.
pub fn check_share_derivative(cfg: &VerifyConfig) -> CheckOutcome {
    let start = Instant::now();
    let run = || -> Result<(bool, String)> {
        let mut rng = cfg.rng(5);
        let model = SuccessModel::linear(0.9, 0.1)?;
        let mut worst = 0.0f64;
        let mut done = 0;
        while done < cfg.share_derivative_cases {
            let n = rng.random_range(4..=6);
            let net = full_support_network(&mut rng, n)?;
            let contract = sp_shares(&net, &model)?;
            let j = rng.random_range(0..n);
            let k = (j + rng.random_range(1..n)) % n;
            let pert = LinkPerturbation::new(j, k)?;
            let d = match d_shares_d_weight(&net, &model, &contract, pert) {
                Err(Error::ActiveSetUnstable(_)) => continue,
                other => other?,
            };
            let mut err = 0.0f64;
            let mut scale = 0.0f64;
            for (i, di) in d.iter().enumerate() {
                let fd = central_difference(
                    |w| Ok(sp_shares(&net.with_link(j, k, w)?, &model)?.allocation.shares()[i]),
                    net.weight(j, k),
                )?;
                err = err.max((di - fd).abs());
                scale = scale.max(fd.abs());
            }
            worst = worst.max(err / scale);
            done += 1;
        }
        Ok((worst <= 1e-4, format!("{done} cases, max relative error {worst:.2e}")))
    };
    outcome("share derivative", start, run())
}

/// Output derivative: common factor across active pairs and agreement with
/// differences at fixed shares.
pub fn check_performance_derivative_with(cfg: &VerifyConfig, deriv: PerformanceDerivative) -> CheckOutcome {
    let start = Instant::now();
    let run = || -> Result<(bool, String)> {
        let mut rng = cfg.rng(6);
        let (mut spread, mut fd_err) = (0.0f64, 0.0f64);
        for case in 0..cfg.share_derivative_cases {
            let n = rng.random_range(3..=6);
            let net = full_support_network(&mut rng, n)?;
            let (model, contract) = with_feasible_model(&mut rng, case % 2 == 0, |m| sp_shares(&net, m))?;
            let s = contract.allocation.shares();
            let mut ratios = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    ratios.push(deriv(&model, &contract, i, j)? / (s[i] * s[j]));
                }
            }
            let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
            spread = spread.max((hi - lo) / hi.abs().max(lo.abs()));
            let fd = central_difference(
                |w| Ok(solve_equilibrium(&net.with_link(0, 1, w)?, &model, &contract.allocation)?.performance),
                net.weight(0, 1),
            )?;
            fd_err = fd_err.max((deriv(&model, &contract, 0, 1)? - fd).abs() / fd.abs());
        }
        Ok((
            spread <= 1e-8 && fd_err <= 1e-4,
            format!(
                "{} contracts, ratio spread {spread:.2e}, difference error {fd_err:.2e}",
                cfg.share_derivative_cases
            ),
        ))
    };
    outcome("output derivative", start, run())
}

pub fn check_performance_derivative(cfg: &VerifyConfig) -> CheckOutcome {
    check_performance_derivative_with(cfg, d_performance_d_weight)
}

/// Optimal residual-profit total share in `beta` for linear `P`: strictly
/// increasing, and the general optimizer reproduces the cubic root.
pub fn check_total_share(cfg: &VerifyConfig) -> CheckOutcome {
    let start = Instant::now();
    let run = || -> Result<(bool, String)> {
        let mut rng = cfg.rng(7);
        let alpha = 0.9;
        let mut nets = vec![WeightedNetwork::from_edges(2, &[(0, 1, 1.0)])?, three_agent(0.8, 0.6)?];
        nets.push(full_support_network(&mut rng, 5)?);
        let (mut increasing, mut gap) = (true, 0.0f64);
        for net in &nets {
            let k_star = search_active_set(net, &SearchOptions::default())?.best.solution.k_star;
            let top = 0.5 * k_star / alpha;
            let betas: Vec<f64> = (1..=20).map(|i| top * i as f64 / 20.0).collect();
            let mut path = Vec::new();
            for &b in &betas {
                let model = SuccessModel::linear(alpha, b)?;
                let s = optimize(net, &model, Objective::ResidualProfit)?.s_star;
                gap = gap.max((s - rp_linear_closed_form(k_star, alpha, b)?).abs());
                path.push(s);
            }
            increasing &= path.windows(2).all(|w| w[1] > w[0]);
        }
        Ok((
            increasing && gap <= 1e-8,
            format!(
                "{} networks x 20 betas, strictly increasing {increasing}, max |optimizer - cubic| {gap:.2e}",
                nets.len()
            ),
        ))
    };
    outcome("total share in beta", start, run())
}

/// Optimal shares do not depend on `beta` (success probability) and share
/// ratios do not depend on `beta` (residual profit).
pub fn check_beta_invariance(cfg: &VerifyConfig) -> CheckOutcome {
    let start = Instant::now();
    let run = || -> Result<(bool, String)> {
        let mut rng = cfg.rng(8);
        let (mut sp_drift, mut rp_drift) = (0.0f64, 0.0f64);
        for case in 0..cfg.invariance_cases {
            let n = rng.random_range(3..=7);
            let net = random::weighted_network(&mut rng, n, 0.6);
            let (_, (sp, rp)) = with_feasible_model(&mut rng, case % 2 == 0, |base| {
                let mut sp = Vec::new();
                let mut rp = Vec::new();
                for beta in [0.05, 0.2, 0.5] {
                    let model = base.with_beta(beta)?;
                    sp.push(sp_shares(&net, &model)?.allocation.shares().to_vec());
                    let c = optimize(&net, &model, Objective::ResidualProfit)?;
                    rp.push(c.allocation.shares().iter().map(|v| v / c.s_star).collect::<Vec<_>>());
                }
                Ok((sp, rp))
            })?;
            for k in 1..3 {
                for i in 0..n {
                    sp_drift = sp_drift.max((sp[k][i] - sp[0][i]).abs());
                    rp_drift = rp_drift.max((rp[k][i] - rp[0][i]).abs());
                }
            }
        }
        Ok((
            sp_drift <= 1e-12 && rp_drift <= 1e-9,
            format!(
                "{} networks, SP share drift {sp_drift:.2e}, RP ratio drift {rp_drift:.2e}",
                cfg.invariance_cases
            ),
        ))
    };
    outcome("beta invariance", start, run())
}

/// Optimal success-probability shares maximize `rho(Sigma G)` against
/// sampled rivals, and `c` is that spectral radius.
pub fn check_spectral_certificate(cfg: &VerifyConfig) -> CheckOutcome {
    let start = Instant::now();
    let run = || -> Result<(bool, String)> {
        let mut rng = cfg.rng(9);
        let (mut margin, mut eigen_gap) = (f64::INFINITY, 0.0f64);
        for case in 0..cfg.certificate_contracts {
            let n = rng.random_range(2..=8);
            let p = rng.random_range(0.3..0.9);
            let net = random::weighted_network(&mut rng, n, p);
            let model = random_model(&mut rng, true);
            let contract = sp_shares(&net, &model)?;
            let cert = spectral_radius_certificate(
                &net,
                contract.allocation.shares(),
                cfg.certificate_trials,
                cfg.seed ^ case as u64,
            );
            margin = margin.min(cert.margin);
            eigen_gap = eigen_gap.max((cert.rho_star - contract.c).abs());
        }
        Ok((
            margin >= -1e-9 && eigen_gap <= 1e-9,
            format!(
                "{} contracts x {} trials, min margin {margin:.3e}, max |rho* - c| {eigen_gap:.2e}",
                cfg.certificate_contracts, cfg.certificate_trials
            ),
        ))
    };
    outcome("spectral radius certificate", start, run())
}

/// Every check in order.
pub fn run_all(cfg: &VerifyConfig) -> Vec<CheckOutcome> {
    vec![
        check_equilibrium(cfg),
        check_balance(cfg),
        check_extensive(cfg),
        check_cliques(cfg),
        check_three_agent(cfg),
        check_figure_two(cfg),
        check_share_derivative(cfg),
        check_performance_derivative(cfg),
        check_total_share(cfg),
        check_beta_invariance(cfg),
        check_spectral_certificate(cfg),
    ]
}

/// Fixed-width pass/fail table.
pub fn render_table(outcomes: &[CheckOutcome]) -> String {
    let mut out = String::new();
    for o in outcomes {
        out.push_str(&format!(
            "{:<4} {:<34} {:>8.2}s  {}\n",
            if o.passed { "PASS" } else { "FAIL" },
            o.name,
            o.elapsed.as_secs_f64(),
            o.detail
        ));
    }
    out
}
