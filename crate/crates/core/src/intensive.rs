//! Optimal shares on a fixed active set.
//!
//! On an active set with subnetwork `W`, optimal shares equalize the
//! weighted neighbourhood equity: `(W sigma)_i = c` for every active `i`.
//! Hence `sigma = c x` with `x = W^-1 1` (equity centrality) and
//! `c = s / 1'x`. Actions are then proportional to shares with factor
//! `mu = P'(Y) / (1 - beta P'(Y) c)`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::equilibrium::{lower_bracket, EquilibriumResult, EquityAllocation};
use crate::linalg::{inverse_with_condition, symmetric_pseudo_solve, MAX_CONDITION};
use crate::network::{AgentSet, WeightedNetwork};
use crate::roots::{bisect, MAX_BISECTIONS};
use crate::success::SuccessModel;
use crate::{Error, Result, EPS_ACTIVE};

/// Residual allowed when accepting a singular subnetwork whose balance
/// system is still consistent.
const CONSISTENCY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntensiveSolution {
    pub set: AgentSet,
    /// Length-`n` share vector; inactive agents hold exactly zero.
    pub shares: Vec<f64>,
    /// Common neighbourhood equity `(W sigma)_i`.
    pub c: f64,
    /// Equity centrality on the set, in set order.
    pub x: Vec<f64>,
    /// `1' W^-1 1`.
    pub k_star: f64,
    /// Total share `s`.
    pub total: f64,
    /// The subnetwork is singular; `x` is the minimum-norm balanced solution.
    pub degenerate: bool,
}

impl IntensiveSolution {
    /// Same support and ratios with total share `s`.
    pub fn scaled(&self, s: f64) -> IntensiveSolution {
        let c = s / self.k_star;
        let mut shares = vec![0.0; self.shares.len()];
        for (&i, &xi) in self.set.members().iter().zip(&self.x) {
            shares[i] = c * xi;
        }
        IntensiveSolution {
            shares,
            c,
            total: s,
            ..self.clone()
        }
    }

    pub fn allocation(&self) -> EquityAllocation {
        EquityAllocation::new(self.shares.clone()).expect("balanced shares are feasible")
    }
}

/// `W^-1 1` for a nonsingular subnetwork `W`.
pub fn equity_centrality(subnet: &WeightedNetwork) -> Result<Vec<f64>> {
    let w = subnet.weights();
    match inverse_with_condition(w) {
        Some((inv, cond)) if cond <= MAX_CONDITION => {
            Ok((inv * DVector::from_element(w.nrows(), 1.0)).as_slice().to_vec())
        }
        Some((_, cond)) => Err(Error::SingularSubnetwork(cond)),
        None => Err(Error::SingularSubnetwork(f64::INFINITY)),
    }
}

/// Balanced allocation of total share `s` on `set`.
///
/// Singular subnetworks are accepted only when `1` lies in the range of `W`;
/// `c` is then still `s / 1'x` for any balanced solution and the
/// minimum-norm solution is used for the ratios.
pub fn allocate_on_set(net: &WeightedNetwork, set: &AgentSet, s: f64) -> Result<IntensiveSolution> {
    if !(s > 0.0 && s <= 1.0 + 1e-12) {
        return Err(Error::OutOfRange(format!("total share {s}")));
    }
    let sub = net.restrict(set)?;
    let (x, degenerate) = match equity_centrality(&sub) {
        Ok(x) => (x, false),
        Err(Error::SingularSubnetwork(cond)) => {
            let ones = DVector::from_element(set.len(), 1.0);
            let (x, residual) = symmetric_pseudo_solve(sub.weights(), &ones, 1.0 / MAX_CONDITION);
            if residual > CONSISTENCY_TOL {
                return Err(Error::SingularSubnetwork(cond));
            }
            (x.as_slice().to_vec(), true)
        }
        Err(e) => return Err(e),
    };
    if x.iter().any(|&xi| xi <= EPS_ACTIVE) {
        return Err(Error::InvalidActiveSet);
    }
    let k_star: f64 = x.iter().sum();
    let base = IntensiveSolution {
        set: set.clone(),
        shares: vec![0.0; net.n()],
        c: 0.0,
        x,
        k_star,
        total: 0.0,
        degenerate,
    };
    Ok(base.scaled(s))
}

/// Equilibrium implied by a balanced allocation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictedEquilibrium {
    pub mu: f64,
    pub actions: Vec<f64>,
    pub performance: f64,
}

/// `s (p / (1 - beta p c) + beta p^2 c / (2 (1 - beta p c)^2))` for `p = P'(Y)`.
pub fn balanced_output(beta: f64, slope: f64, c: f64, s: f64) -> f64 {
    let d = 1.0 - beta * slope * c;
    s * (slope / d + beta * slope * slope * c / (2.0 * d * d))
}

/// Equilibrium performance of a balanced allocation with total `s` and
/// constant `c`, from the scalar fixed point `Y = balanced_output(P'(Y))`.
pub fn balanced_performance(model: &SuccessModel, s: f64, c: f64) -> Result<f64> {
    let beta = model.beta();
    if let Some(alpha) = model.constant_slope() {
        let load = alpha * beta * c;
        if load >= 1.0 {
            return Err(Error::NoEquilibriumLinearP(load));
        }
        let y = balanced_output(beta, alpha, c, s);
        model.deriv(y)?;
        return Ok(y);
    }
    let gap = |y: f64| {
        let slope = model.deriv(y)?;
        if beta * slope * c >= 1.0 {
            return Err(Error::SpectralInfeasible);
        }
        Ok(balanced_output(beta, slope, c, s) - y)
    };
    let lo = lower_bracket(model, beta * c, &gap)?;
    let mut hi = (2.0 * lo).max(1.0);
    let mut doublings = 0;
    while gap(hi)? >= 0.0 {
        hi *= 2.0;
        doublings += 1;
        if doublings > MAX_BISECTIONS {
            return Err(Error::NoConvergence("balanced performance bracket"));
        }
    }
    bisect(gap, lo, hi)
}

/// `mu`, actions `mu sigma` and performance for a balanced allocation.
pub fn predicted_equilibrium(model: &SuccessModel, sol: &IntensiveSolution) -> Result<PredictedEquilibrium> {
    let performance = balanced_performance(model, sol.total, sol.c)?;
    let slope = model.deriv(performance)?;
    let mu = slope / (1.0 - slope * model.beta() * sol.c);
    Ok(PredictedEquilibrium {
        mu,
        actions: sol.shares.iter().map(|s| mu * s).collect(),
        performance,
    })
}

/// Spread of the balance conditions across active agents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BalanceReport {
    /// `max_i |(G sigma)_i - mean|` over active `i`.
    pub equity_spread: f64,
    /// `max_i |(G a)_i - mean|` over active `i`.
    pub action_spread: f64,
}

fn spread(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    values.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max)
}

pub fn check_balance(net: &WeightedNetwork, alloc: &EquityAllocation, result: &EquilibriumResult) -> BalanceReport {
    let g: &DMatrix<f64> = net.weights();
    let gs = g * DVector::from_column_slice(alloc.shares());
    let ga = g * DVector::from_column_slice(&result.actions);
    let active = alloc.active_set();
    let pick = |v: &DVector<f64>| active.members().iter().map(|&i| v[i]).collect::<Vec<_>>();
    BalanceReport {
        equity_spread: spread(&pick(&gs)),
        action_spread: spread(&pick(&ga)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::solve_equilibrium;
    use crate::network::{complete, star, three_agent};
    use approx::assert_relative_eq;

    fn set(v: &[usize]) -> AgentSet {
        AgentSet::new(v.to_vec()).unwrap()
    }

    #[test]
    fn centrality_examples() {
        let x = equity_centrality(&complete(3)).unwrap();
        for xi in x {
            assert_relative_eq!(xi, 0.5, epsilon = 1e-15);
        }
        let pair = WeightedNetwork::from_edges(2, &[(0, 1, 1.0)]).unwrap();
        assert_eq!(equity_centrality(&pair).unwrap(), vec![1.0, 1.0]);

        let x = equity_centrality(&three_agent(0.8, 0.6).unwrap()).unwrap();
        let (a, b) = (0.8, 0.6);
        let closed = [
            (1.0 + a - b) / (2.0 * a),
            (1.0 + b - a) / (2.0 * b),
            (a + b - 1.0) / (2.0 * a * b),
        ];
        for i in 0..3 {
            assert_relative_eq!(x[i], closed[i], epsilon = 1e-14);
        }
        assert_relative_eq!(x[0], 0.75, epsilon = 1e-14);
        assert_relative_eq!(x[1], 2.0 / 3.0, epsilon = 1e-14);
        assert_relative_eq!(x[2], 5.0 / 12.0, epsilon = 1e-14);
    }

    #[test]
    fn centrality_of_singular_network_fails() {
        assert!(matches!(equity_centrality(&star(2)), Err(Error::SingularSubnetwork(_))));
    }

    #[test]
    fn allocations_on_sets() {
        let pair = WeightedNetwork::from_edges(2, &[(0, 1, 1.0)]).unwrap();
        let sol = allocate_on_set(&pair, &AgentSet::all(2), 1.0).unwrap();
        assert_eq!(sol.shares, vec![0.5, 0.5]);
        assert_eq!(sol.c, 0.5);

        let sol = allocate_on_set(&complete(3), &AgentSet::all(3), 1.0).unwrap();
        for s in &sol.shares {
            assert_relative_eq!(*s, 1.0 / 3.0, epsilon = 1e-15);
        }
        assert_relative_eq!(sol.c, 2.0 / 3.0, epsilon = 1e-15);

        let g = three_agent(0.8, 0.6).unwrap();
        let sol = allocate_on_set(&g, &AgentSet::all(3), 1.0).unwrap();
        assert_relative_eq!(sol.shares[0], 9.0 / 22.0, epsilon = 1e-14);
        assert_relative_eq!(sol.shares[1], 8.0 / 22.0, epsilon = 1e-14);
        assert_relative_eq!(sol.shares[2], 5.0 / 22.0, epsilon = 1e-14);
        assert_relative_eq!(sol.c, 6.0 / 11.0, epsilon = 1e-14);
        // (G sigma)_1 = sigma_2 + 0.8 sigma_3
        assert_relative_eq!(sol.shares[1] + 0.8 * sol.shares[2], sol.c, epsilon = 1e-14);
    }

    #[test]
    fn invalid_and_singular_sets() {
        let g = three_agent(0.4, 0.3).unwrap();
        assert_eq!(
            allocate_on_set(&g, &AgentSet::all(3), 1.0),
            Err(Error::InvalidActiveSet)
        );
        assert!(matches!(
            allocate_on_set(&g, &set(&[1]), 1.0),
            Err(Error::SingularSubnetwork(_))
        ));
        assert!(allocate_on_set(&g, &set(&[0, 1]), 0.0).is_err());
    }

    #[test]
    fn consistent_singular_star_is_a_balanced_tie() {
        let sol = allocate_on_set(&star(4), &set(&[0, 1, 2]), 1.0).unwrap();
        assert!(sol.degenerate);
        assert_relative_eq!(sol.c, 0.5, epsilon = 1e-12);
        assert_relative_eq!(sol.shares[0], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn prediction_for_pair() {
        let pair = WeightedNetwork::from_edges(2, &[(0, 1, 1.0)]).unwrap();
        let model = SuccessModel::linear(0.5, 0.5).unwrap();
        let sol = allocate_on_set(&pair, &AgentSet::all(2), 1.0).unwrap();
        let p = predicted_equilibrium(&model, &sol).unwrap();
        assert_relative_eq!(p.mu, 0.5 / 0.875, epsilon = 1e-14);
        assert_relative_eq!(p.actions[0], 0.25 / 0.875, epsilon = 1e-14);
        assert_relative_eq!(p.performance, 0.612_244_897_959, epsilon = 1e-11);
    }

    #[test]
    fn prediction_for_triangle() {
        let model = SuccessModel::linear(0.3, 0.2).unwrap();
        let sol = allocate_on_set(&complete(3), &AgentSet::all(3), 1.0).unwrap();
        let p = predicted_equilibrium(&model, &sol).unwrap();
        assert_relative_eq!(p.mu, 0.3125, epsilon = 1e-14);
        assert_relative_eq!(p.actions[0], 0.3125 / 3.0, epsilon = 1e-14);
        let expected = 0.3 / 0.96 + 0.2 * 0.09 * (2.0 / 3.0) / (2.0 * 0.96 * 0.96);
        assert_relative_eq!(p.performance, expected, epsilon = 1e-14);
        assert_relative_eq!(p.performance, 0.319_010, epsilon = 1e-6);
    }

    #[test]
    fn prediction_without_spillovers() {
        let model = SuccessModel::saturating(0.9, 1.0, 1e-300).unwrap();
        let sol = allocate_on_set(&complete(3), &AgentSet::all(3), 1.0).unwrap();
        let p = predicted_equilibrium(&model, &sol).unwrap();
        let slope = model.deriv(p.performance).unwrap();
        assert_relative_eq!(p.mu, slope, epsilon = 1e-15);
    }

    #[test]
    fn prediction_agrees_with_full_solve() {
        let g = three_agent(0.8, 0.6).unwrap();
        for model in [
            SuccessModel::linear(0.9, 0.4).unwrap(),
            SuccessModel::saturating(0.9, 1.3, 2.0).unwrap(),
        ] {
            let sol = allocate_on_set(&g, &AgentSet::all(3), 0.7).unwrap();
            let p = predicted_equilibrium(&model, &sol).unwrap();
            let eq = solve_equilibrium(&g, &model, &sol.allocation()).unwrap();
            assert_relative_eq!(p.performance, eq.performance, max_relative = 1e-9);
            for i in 0..3 {
                assert_relative_eq!(p.actions[i], eq.actions[i], max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn balance_spreads() {
        let model = SuccessModel::linear(0.3, 0.2).unwrap();
        let k3 = complete(3);
        let sol = allocate_on_set(&k3, &AgentSet::all(3), 1.0).unwrap();
        let eq = solve_equilibrium(&k3, &model, &sol.allocation()).unwrap();
        let rep = check_balance(&k3, &sol.allocation(), &eq);
        assert!(rep.equity_spread <= 1e-10 && rep.action_spread <= 1e-10);

        // Row sums (0.5, 0.7, 0.8) around their mean 2/3.
        let alloc = EquityAllocation::new(vec![0.5, 0.3, 0.2]).unwrap();
        let eq = solve_equilibrium(&k3, &model, &alloc).unwrap();
        let rep = check_balance(&k3, &alloc, &eq);
        assert_relative_eq!(rep.equity_spread, 1.0 / 6.0, epsilon = 1e-12);

        let g = three_agent(0.8, 0.6).unwrap();
        let sol = allocate_on_set(&g, &AgentSet::all(3), 1.0).unwrap();
        let eq = solve_equilibrium(&g, &model, &sol.allocation()).unwrap();
        let rep = check_balance(&g, &sol.allocation(), &eq);
        assert!(rep.equity_spread <= 1e-9 && rep.action_spread <= 1e-9);
    }
}
