//! Optimal total share and the assembled contract.
//!
//! The support and the share ratios do not depend on the total share `s`
//! (`c` is linear in `s`), so the search runs once at `s = 1` and only the
//! scalar `s` is left. Success-probability maximization uses all equity;
//! residual-profit maximization trades `1 - s` against `P(Y*(s))`.

use serde::Serialize;

use crate::equilibrium::{solve_equilibrium, EquilibriumResult, EquityAllocation};
use crate::extensive::{search_active_set, SearchOptions, SearchReport};
use crate::intensive::{balanced_output, balanced_performance, check_balance, BalanceReport, IntensiveSolution};
use crate::network::{AgentSet, WeightedNetwork};
use crate::roots::{bisect, golden_section_max};
use crate::success::SuccessModel;
use crate::{Error, Result};

/// Points in the coarse scan of `V(s)` before refinement.
pub const RP_GRID: usize = 1000;
/// Grid values above the refined optimum by more than this are reported.
pub const GRID_DISCREPANCY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Objective {
    /// Residual profit `(1 - s) P(Y*)`.
    #[serde(rename = "rp")]
    ResidualProfit,
    /// Success probability `P(Y*)` with `s <= 1`.
    #[serde(rename = "sp")]
    SuccessProbability,
}

impl std::str::FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rp" => Ok(Objective::ResidualProfit),
            "sp" => Ok(Objective::SuccessProbability),
            other => Err(Error::Parse(format!("unknown objective {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimalContract {
    pub objective: Objective,
    pub allocation: EquityAllocation,
    pub active_set: AgentSet,
    pub c: f64,
    pub s_star: f64,
    pub equilibrium: EquilibriumResult,
    /// `V(s*)` for residual profit, `P(Y*)` for success probability.
    pub principal_value: f64,
    pub balance: BalanceReport,
    /// Supports tied with the chosen one.
    pub ties: Vec<AgentSet>,
    /// Balanced solution at `s*`.
    pub solution: IntensiveSolution,
    /// Largest excess of the coarse scan over the refined optimum (zero
    /// for success probability).
    pub grid_discrepancy: f64,
}

pub fn optimize(net: &WeightedNetwork, model: &SuccessModel, objective: Objective) -> Result<OptimalContract> {
    optimize_with(net, model, objective, &SearchOptions::default())
}

pub fn optimize_with(
    net: &WeightedNetwork,
    model: &SuccessModel,
    objective: Objective,
    opts: &SearchOptions,
) -> Result<OptimalContract> {
    let report = search_active_set(net, opts)?;
    contract_for_support(net, model, objective, &report)
}

/// Contract built on the best support of an existing search.
pub fn contract_for_support(
    net: &WeightedNetwork,
    model: &SuccessModel,
    objective: Objective,
    report: &SearchReport,
) -> Result<OptimalContract> {
    let unit = &report.best.solution;
    let (s_star, grid_discrepancy) = match objective {
        Objective::SuccessProbability => (1.0, 0.0),
        Objective::ResidualProfit => rp_optimum(model, unit.k_star)?,
    };
    let solution = unit.scaled(s_star);
    let allocation = solution.allocation();
    let equilibrium = solve_equilibrium(net, model, &allocation)?;
    let balance = check_balance(net, &allocation, &equilibrium);
    if balance.equity_spread > 1e-9 || balance.action_spread > 1e-9 {
        log::warn!("balance spreads {balance:?} on {}", solution.set);
    }
    let principal_value = match objective {
        Objective::SuccessProbability => equilibrium.success_prob,
        Objective::ResidualProfit => equilibrium.principal_value,
    };
    Ok(OptimalContract {
        objective,
        active_set: solution.set.clone(),
        c: solution.c,
        s_star,
        principal_value,
        balance,
        ties: report.ties.iter().map(|t| t.set.clone()).collect(),
        allocation,
        equilibrium,
        solution,
        grid_discrepancy,
    })
}

/// `V(s) = (1 - s) P(Y*(s))` along the balanced ray with `c = s / k*`.
pub fn rp_value(model: &SuccessModel, k_star: f64, s: f64) -> Result<f64> {
    let y = balanced_performance(model, s, s / k_star)?;
    Ok((1.0 - s) * model.eval(y)?)
}

/// `dV/ds`, differentiating the scalar fixed point
/// `Y = s f(P'(Y), s / k*)` implicitly.
pub fn rp_value_slope(model: &SuccessModel, k_star: f64, s: f64) -> Result<f64> {
    let beta = model.beta();
    let c = s / k_star;
    let y = balanced_performance(model, s, c)?;
    let p = model.deriv(y)?;
    let p2 = model.second_deriv(y)?;
    let u = beta * p * c;
    let d = 1.0 - u;
    let f = balanced_output(beta, p, c, 1.0);
    let f_p = (1.0 + u) / (d * d) + u * u / (d * d * d);
    let f_c = beta * p * p * (1.5 / (d * d) + u / (d * d * d));
    let g_y = s * f_p * p2 - 1.0;
    let g_s = f + s * f_c / k_star;
    let dy = -g_s / g_y;
    Ok(-model.eval(y)? + (1.0 - s) * p * dy)
}

/// Maximizer of `V` on `(0, 1)` and the scan discrepancy.
///
/// A 1000-point scan locates the best cell (infeasible points count as
/// minus infinity), golden-section search narrows it, and bisection on the
/// analytic slope finishes to machine precision.
fn rp_optimum(model: &SuccessModel, k_star: f64) -> Result<(f64, f64)> {
    let value = |s: f64| rp_value(model, k_star, s).unwrap_or(f64::NEG_INFINITY);
    let grid: Vec<f64> = (1..=RP_GRID).map(|i| i as f64 / (RP_GRID + 1) as f64).collect();
    let values: Vec<f64> = grid.iter().map(|&s| value(s)).collect();
    let (best, &v_best) = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty grid");
    if !v_best.is_finite() {
        return Err(Error::NoInteriorOptimum);
    }
    let lo = if best == 0 { 0.5 * grid[0] } else { grid[best - 1] };
    let hi = if best + 1 == grid.len() { 1.0 } else { grid[best + 1] };
    let coarse = golden_section_max(value, lo, hi, 1e-6);

    let slope = |s: f64| Ok(rp_value_slope(model, k_star, s).unwrap_or(-1.0));
    let s_star = match (slope(lo)?, slope(hi)?) {
        (a, b) if a > 0.0 && b < 0.0 => bisect(slope, lo, hi)?,
        _ => coarse,
    };
    let v_star = rp_value(model, k_star, s_star).map_err(|_| Error::NoInteriorOptimum)?;
    let d = rp_value_slope(model, k_star, s_star).map_err(|_| Error::NoInteriorOptimum)?;
    if !(s_star > 0.0 && s_star < 1.0) || d.abs() > 1e-8 {
        return Err(Error::NoInteriorOptimum);
    }
    let discrepancy = (v_best - v_star).max(0.0);
    if discrepancy > GRID_DISCREPANCY_TOL {
        log::warn!("coarse scan beats refined optimum by {discrepancy:e}");
    }
    Ok((s_star, discrepancy))
}

/// Root in `(1/2, 1)` of `-(beta alpha)^2 s^3 + 3 beta alpha k s^2 - 4 k^2 s + 2 k^2`,
/// the optimal total share for `P(Y) = alpha Y` under residual profit.
pub fn rp_linear_closed_form(k_star: f64, alpha: f64, beta: f64) -> Result<f64> {
    let ba = beta * alpha;
    if ba >= k_star {
        return Err(Error::InfeasibleComplementarity { beta_alpha: ba, k_star });
    }
    let k = k_star;
    let cubic = |s: f64| Ok(((-ba * ba * s + 3.0 * ba * k) * s - 4.0 * k * k) * s + 2.0 * k * k);
    bisect(cubic, 0.5, 1.0)
}

/// Largest amount by which `(1 - s) P(Y)` at `points` evenly spaced total
/// shares, each solved from scratch on the contract's support, exceeds the
/// contract's own value.
pub fn rp_grid_excess(net: &WeightedNetwork, model: &SuccessModel, contract: &OptimalContract, points: usize) -> f64 {
    let unit = contract.solution.scaled(1.0);
    (1..=points)
        .map(|i| i as f64 / (points + 1) as f64)
        .filter_map(|s| {
            let alloc = unit.scaled(s).allocation();
            solve_equilibrium(net, model, &alloc).ok().map(|eq| eq.principal_value)
        })
        .map(|v| v - contract.principal_value)
        .fold(0.0, f64::max)
}
