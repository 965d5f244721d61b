//! Nash equilibrium of the effort game for a fixed equity allocation.
//!
//! Agent `i` maximizes `P(Y) sigma_i - a_i^2 / 2`. Its first-order condition
//! is `a_i = P'(Y) sigma_i (1 + beta (G a)_i)`, so for a given performance
//! level `y` the action profile solves the linear system
//! `[I - P'(y) beta Sigma G] a = P'(y) sigma`. The equilibrium is the unique
//! fixed point `Y(a(y)) = y`; the gap `Y(a(y)) - y` is strictly decreasing,
//! which makes bisection unconditionally convergent.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::linalg::{self, spectral_radius_sigma_g};
use crate::network::{AgentSet, WeightedNetwork};
use crate::roots::{bisect, MAX_BISECTIONS};
use crate::success::SuccessModel;
use crate::{Error, Result, EPS_ACTIVE};

/// Nonnegative share vector with total at most one.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct EquityAllocation {
    shares: Vec<f64>,
}

impl EquityAllocation {
    pub fn new(shares: Vec<f64>) -> Result<Self> {
        if shares.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(Error::InvalidAllocation("shares must be finite and nonnegative".into()));
        }
        let total: f64 = shares.iter().sum();
        if total > 1.0 + 1e-12 {
            return Err(Error::InvalidAllocation(format!("shares sum to {total} > 1")));
        }
        Ok(EquityAllocation { shares })
    }

    pub fn zeros(n: usize) -> Self {
        EquityAllocation { shares: vec![0.0; n] }
    }

    pub fn shares(&self) -> &[f64] {
        &self.shares
    }

    pub fn len(&self) -> usize {
        self.shares.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shares.is_empty()
    }

    /// Sum of shares.
    pub fn total(&self) -> f64 {
        self.shares.iter().sum()
    }

    /// Agents with a share above [`EPS_ACTIVE`].
    pub fn active_set(&self) -> AgentSet {
        AgentSet::new((0..self.len()).filter(|&i| self.shares[i] > EPS_ACTIVE).collect()).expect("indices are distinct")
    }

    fn check_len(&self, net: &WeightedNetwork) -> Result<()> {
        if self.len() != net.n() {
            return Err(Error::InvalidAllocation(format!(
                "{} shares for {} agents",
                self.len(),
                net.n()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumResult {
    pub actions: Vec<f64>,
    pub performance: f64,
    pub success_prob: f64,
    pub agent_payoffs: Vec<f64>,
    pub principal_value: f64,
    /// `max_i |a_i - P'(Y) sigma_i (1 + beta (G a)_i)|`.
    pub foc_residual: f64,
}

/// Endogenous Bonacich objects at an equilibrium.
#[derive(Debug, Clone, PartialEq)]
pub struct BonacichDiagnostics {
    /// `P'(y) [I - beta P'(y) Sigma G]^-1`.
    pub m: DMatrix<f64>,
    /// Column sums of `m`.
    pub b: Vec<f64>,
    /// `b_bar_i = sum_j m_ji b_j`.
    pub b_bar: Vec<f64>,
}

/// `Y(a) = sum_i a_i + (beta / 2) sum_ij G_ij a_i a_j`.
pub fn team_performance(net: &WeightedNetwork, beta: f64, actions: &[f64]) -> f64 {
    let a = DVector::from_column_slice(actions);
    a.sum() + 0.5 * beta * a.dot(&(net.weights() * &a))
}

fn resolvent(net: &WeightedNetwork, shares: &[f64], scale: f64) -> DMatrix<f64> {
    let n = net.n();
    let g = net.weights();
    DMatrix::from_fn(n, n, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        id - scale * shares[i] * g[(i, j)]
    })
}

fn actions_for_slope(net: &WeightedNetwork, beta: f64, shares: &[f64], slope: f64) -> Result<DVector<f64>> {
    let rhs = DVector::from_iterator(shares.len(), shares.iter().map(|s| slope * s));
    let mut a = linalg::solve(&resolvent(net, shares, slope * beta), &rhs).ok_or(Error::SpectralInfeasible)?;
    for (ai, &s) in a.iter_mut().zip(shares) {
        if s == 0.0 {
            *ai = 0.0;
        }
    }
    Ok(a)
}

/// Action profile `[I - P'(y) beta Sigma G]^-1 P'(y) sigma` for a trial
/// performance level `y`. Fails with `SpectralInfeasible` when
/// `P'(y) beta rho(Sigma G) >= 1`, where no nonnegative solution exists.
pub fn actions_at(net: &WeightedNetwork, model: &SuccessModel, alloc: &EquityAllocation, y: f64) -> Result<Vec<f64>> {
    alloc.check_len(net)?;
    let slope = model.deriv(y)?;
    let rho = spectral_radius_sigma_g(net.weights(), alloc.shares());
    if slope * model.beta() * rho >= 1.0 {
        return Err(Error::SpectralInfeasible);
    }
    Ok(actions_for_slope(net, model.beta(), alloc.shares(), slope)?
        .as_slice()
        .to_vec())
}

/// The fixed-point gap `Y(a(y)) - y`, strictly decreasing in `y`.
pub fn fixed_point_gap(net: &WeightedNetwork, model: &SuccessModel, alloc: &EquityAllocation, y: f64) -> Result<f64> {
    let a = actions_at(net, model, alloc, y)?;
    Ok(team_performance(net, model.beta(), &a) - y)
}

/// Unique Nash equilibrium for the allocation.
pub fn solve_equilibrium(
    net: &WeightedNetwork,
    model: &SuccessModel,
    alloc: &EquityAllocation,
) -> Result<EquilibriumResult> {
    alloc.check_len(net)?;
    let beta = model.beta();
    let shares = alloc.shares();
    if alloc.total() == 0.0 {
        return assemble(net, model, alloc, vec![0.0; net.n()]);
    }
    let rho = spectral_radius_sigma_g(net.weights(), shares);

    if let Some(alpha) = model.constant_slope() {
        // With constant P' the system is linear and the fixed point is explicit.
        let load = alpha * beta * rho;
        if load >= 1.0 {
            return Err(Error::NoEquilibriumLinearP(load));
        }
        let a = actions_for_slope(net, beta, shares, alpha)?;
        return assemble(net, model, alloc, a.as_slice().to_vec());
    }

    let gap = |y: f64| fixed_point_gap(net, model, alloc, y);
    let lo = lower_bracket(model, beta * rho, &gap)?;
    let mut hi = (2.0 * lo).max(1.0);
    let mut doublings = 0;
    while gap(hi)? >= 0.0 {
        hi *= 2.0;
        doublings += 1;
        if doublings > MAX_BISECTIONS {
            return Err(Error::NoConvergence("equilibrium upper bracket"));
        }
    }
    let y = bisect(gap, lo, hi)?;
    let g = fixed_point_gap(net, model, alloc, y)?;
    if g.abs() > 1e-12 * y.max(1.0) {
        return Err(Error::NoConvergence("equilibrium bisection"));
    }
    assemble(net, model, alloc, actions_at(net, model, alloc, y)?)
}

/// Smallest trial level with `P'(y) * load < 1` and a nonnegative gap.
///
/// `load` is `beta * rho`. When `P'(0) * load >= 1` the threshold `y0` with
/// `P'(y0) * load = 1` is located first; the gap blows up just above it.
pub(crate) fn lower_bracket<F>(model: &SuccessModel, load: f64, gap: &F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if model.deriv(0.0)? * load < 1.0 {
        return Ok(0.0);
    }
    let excess = |y: f64| Ok(model.deriv(y)? * load - 1.0);
    let mut top = 1.0;
    let mut doublings = 0;
    while excess(top)? >= 0.0 {
        top *= 2.0;
        doublings += 1;
        if doublings > MAX_BISECTIONS {
            return Err(Error::NoConvergence("spectral threshold bracket"));
        }
    }
    let y0 = bisect(excess, 0.0, top)?;
    let mut delta = 1e-6 * y0.max(1.0);
    for _ in 0..MAX_BISECTIONS {
        let y = y0 + delta;
        match gap(y) {
            Ok(v) if v >= 0.0 => return Ok(y),
            Ok(_) => delta *= 0.5,
            Err(Error::SpectralInfeasible) => delta *= 2.0,
            Err(e) => return Err(e),
        }
    }
    Err(Error::NoConvergence("equilibrium lower bracket"))
}

fn assemble(
    net: &WeightedNetwork,
    model: &SuccessModel,
    alloc: &EquityAllocation,
    actions: Vec<f64>,
) -> Result<EquilibriumResult> {
    let beta = model.beta();
    let performance = team_performance(net, beta, &actions);
    let success_prob = model.eval(performance)?;
    let slope = model.deriv(performance)?;
    let shares = alloc.shares();
    let a = DVector::from_column_slice(&actions);
    let ga = net.weights() * &a;
    let foc_residual = (0..actions.len())
        .map(|i| (actions[i] - slope * shares[i] * (1.0 + beta * ga[i])).abs())
        .fold(0.0, f64::max);
    let agent_payoffs = shares
        .iter()
        .zip(&actions)
        .map(|(s, a)| success_prob * s - 0.5 * a * a)
        .collect();
    Ok(EquilibriumResult {
        actions,
        performance,
        success_prob,
        agent_payoffs,
        principal_value: (1.0 - alloc.total()) * success_prob,
        foc_residual,
    })
}

/// Endogenous Bonacich matrix, its column sums and the weighted sums
/// `b_bar`, evaluated at the equilibrium performance.
pub fn bonacich_diagnostics(
    net: &WeightedNetwork,
    model: &SuccessModel,
    alloc: &EquityAllocation,
    result: &EquilibriumResult,
) -> Result<BonacichDiagnostics> {
    alloc.check_len(net)?;
    let slope = model.deriv(result.performance)?;
    let inv = resolvent(net, alloc.shares(), slope * model.beta())
        .try_inverse()
        .ok_or(Error::SpectralInfeasible)?;
    let m = inv * slope;
    let n = net.n();
    let b: Vec<f64> = (0..n).map(|i| m.column(i).sum()).collect();
    let b_bar = (0..n).map(|i| (0..n).map(|j| m[(j, i)] * b[j]).sum()).collect();
    Ok(BonacichDiagnostics { m, b, b_bar })
}

/// Largest payoff improvement any single agent can find by moving to a
/// point of a uniform grid on `[0, 2 max_i a_i + 1]` while the others hold
/// their actions. Payoffs use the true `P`, cap included. Returns zero when
/// no grid point improves on the current action.
pub fn verify_nash(
    net: &WeightedNetwork,
    model: &SuccessModel,
    alloc: &EquityAllocation,
    result: &EquilibriumResult,
    grid: usize,
) -> f64 {
    let beta = model.beta();
    let shares = alloc.shares();
    let top = 2.0 * result.actions.iter().copied().fold(0.0, f64::max) + 1.0;
    let payoff =
        |i: usize, a: &[f64]| model.prob_unchecked(team_performance(net, beta, a)) * shares[i] - 0.5 * a[i] * a[i];
    let mut gain: f64 = 0.0;
    let mut trial = result.actions.clone();
    for i in 0..net.n() {
        let base = payoff(i, &result.actions);
        for k in 0..=grid {
            trial[i] = top * k as f64 / grid as f64;
            gain = gain.max(payoff(i, &trial) - base);
        }
        trial[i] = result.actions[i];
    }
    gain
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{complete, three_agent};
    use approx::assert_relative_eq;

    fn pair() -> WeightedNetwork {
        WeightedNetwork::from_edges(2, &[(0, 1, 1.0)]).unwrap()
    }

    #[test]
    fn team_performance_examples() {
        let y = team_performance(&pair(), 0.5, &[2.0 / 7.0, 2.0 / 7.0]);
        assert_relative_eq!(y, 0.612_245, epsilon = 1e-6);
        assert_eq!(team_performance(&pair(), 0.5, &[0.0, 0.0]), 0.0);
        assert_eq!(team_performance(&complete(3), 1.0, &[1.0, 1.0, 1.0]), 6.0);
    }

    #[test]
    fn symmetric_pair_equilibrium() {
        // a = (alpha/2) / (1 - alpha beta / 2) = 0.25 / 0.875.
        let model = SuccessModel::linear(0.5, 0.5).unwrap();
        let alloc = EquityAllocation::new(vec![0.5, 0.5]).unwrap();
        let eq = solve_equilibrium(&pair(), &model, &alloc).unwrap();
        assert_relative_eq!(eq.actions[0], 0.25 / 0.875, epsilon = 1e-14);
        assert_relative_eq!(eq.actions[1], 0.25 / 0.875, epsilon = 1e-14);
        assert_relative_eq!(eq.performance, 0.612_244_897_959, epsilon = 1e-11);
        assert!(eq.foc_residual < 1e-14);
    }

    #[test]
    fn zero_shares_give_zero_actions() {
        let model = SuccessModel::saturating(0.9, 1.0, 0.5).unwrap();
        let eq = solve_equilibrium(&pair(), &model, &EquityAllocation::zeros(2)).unwrap();
        assert_eq!(eq.actions, vec![0.0, 0.0]);
        assert_eq!(eq.performance, 0.0);
    }

    #[test]
    fn lone_active_agent() {
        let model = SuccessModel::linear(0.5, 0.5).unwrap();
        let alloc = EquityAllocation::new(vec![1.0, 0.0]).unwrap();
        let eq = solve_equilibrium(&pair(), &model, &alloc).unwrap();
        assert_eq!(eq.actions, vec![0.5, 0.0]);
        assert_eq!(eq.performance, 0.5);
    }

    #[test]
    fn explosive_linear_model_is_rejected() {
        // rho(Sigma G) = 0.5, so alpha beta = 2 puts the load at exactly 1.
        let model = SuccessModel::linear(0.5, 4.0).unwrap();
        let alloc = EquityAllocation::new(vec![0.5, 0.5]).unwrap();
        assert!(matches!(
            solve_equilibrium(&pair(), &model, &alloc),
            Err(Error::NoEquilibriumLinearP(_))
        ));
    }

    #[test]
    fn kink_is_reported() {
        let model = SuccessModel::linear(0.9, 1.5).unwrap();
        let alloc = EquityAllocation::new(vec![0.5, 0.5]).unwrap();
        assert!(matches!(
            solve_equilibrium(&pair(), &model, &alloc),
            Err(Error::KinkReached(_))
        ));
    }

    #[test]
    fn saturating_with_large_spillovers_brackets_above_threshold() {
        // P'(0) beta rho = 0.9 * 4 * 20 * 0.5 = 36 > 1.
        let model = SuccessModel::saturating(0.9, 4.0, 20.0).unwrap();
        let alloc = EquityAllocation::new(vec![0.5, 0.5]).unwrap();
        let eq = solve_equilibrium(&pair(), &model, &alloc).unwrap();
        assert!(eq.foc_residual < 1e-10);
        let slope = model.deriv(eq.performance).unwrap();
        assert!(slope * 20.0 * 0.5 < 1.0);
    }

    #[test]
    fn allocation_validation() {
        assert!(EquityAllocation::new(vec![0.6, 0.5]).is_err());
        assert!(EquityAllocation::new(vec![-0.1, 0.5]).is_err());
        let model = SuccessModel::linear(0.5, 0.5).unwrap();
        let short = EquityAllocation::new(vec![0.5]).unwrap();
        assert!(solve_equilibrium(&pair(), &model, &short).is_err());
    }

    #[test]
    fn bonacich_column_sums_equal_action_share_ratios() {
        let model = SuccessModel::linear(0.5, 0.5).unwrap();
        let alloc = EquityAllocation::new(vec![0.5, 0.5]).unwrap();
        let eq = solve_equilibrium(&pair(), &model, &alloc).unwrap();
        let d = bonacich_diagnostics(&pair(), &model, &alloc, &eq).unwrap();
        assert_relative_eq!(d.b[0], 0.571_428_571_428_6, epsilon = 1e-12);
        assert_relative_eq!(d.b[1], eq.actions[1] / 0.5, epsilon = 1e-12);

        let alloc = EquityAllocation::new(vec![1.0, 0.0]).unwrap();
        let eq = solve_equilibrium(&pair(), &model, &alloc).unwrap();
        let d = bonacich_diagnostics(&pair(), &model, &alloc, &eq).unwrap();
        assert_relative_eq!(d.b[0], 0.5, epsilon = 1e-14);
    }

    #[test]
    fn bonacich_without_spillovers_is_diagonal() {
        let model = SuccessModel::saturating(0.9, 1.0, 1e-300).unwrap();
        let alloc = EquityAllocation::new(vec![0.3, 0.3, 0.4]).unwrap();
        let net = complete(3);
        let eq = solve_equilibrium(&net, &model, &alloc).unwrap();
        let d = bonacich_diagnostics(&net, &model, &alloc, &eq).unwrap();
        let slope = model.deriv(eq.performance).unwrap();
        for i in 0..3 {
            assert_relative_eq!(d.b[i], slope, epsilon = 1e-15);
        }
    }

    #[test]
    fn nash_check_accepts_equilibria_and_flags_perturbations() {
        let model = SuccessModel::linear(0.5, 0.5).unwrap();
        let alloc = EquityAllocation::new(vec![0.5, 0.5]).unwrap();
        let eq = solve_equilibrium(&pair(), &model, &alloc).unwrap();
        assert!(verify_nash(&pair(), &model, &alloc, &eq, 1000) <= 1e-6);

        let mut off = eq.clone();
        off.actions.iter_mut().for_each(|a| *a += 0.1);
        assert!(verify_nash(&pair(), &model, &alloc, &off, 1000) > 1e-4);

        let zero = EquityAllocation::zeros(2);
        let eq0 = solve_equilibrium(&pair(), &model, &zero).unwrap();
        assert_eq!(verify_nash(&pair(), &model, &zero, &eq0, 1000), 0.0);
    }

    #[test]
    fn weighted_saturating_equilibrium_satisfies_foc() {
        let net = three_agent(0.8, 0.6).unwrap();
        let model = SuccessModel::saturating(0.8, 1.5, 0.7).unwrap();
        let alloc = EquityAllocation::new(vec![0.4, 0.25, 0.2]).unwrap();
        let eq = solve_equilibrium(&net, &model, &alloc).unwrap();
        assert!(eq.foc_residual < 1e-12);
        assert_relative_eq!(
            eq.performance,
            team_performance(&net, 0.7, &eq.actions),
            epsilon = 1e-15
        );
    }
}
