//! Derivatives of the optimal contract in link weights and `beta`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::extensive::SearchOptions;
use crate::network::WeightedNetwork;
use crate::objective::{optimize_with, rp_linear_closed_form, Objective, OptimalContract};
use crate::success::SuccessModel;
use crate::{Error, Result};

/// Central-difference step.
pub const FD_STEP: f64 = 1e-5;

/// The link `G_jk = G_kj` being varied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LinkPerturbation {
    pub j: usize,
    pub k: usize,
}

impl LinkPerturbation {
    pub fn new(j: usize, k: usize) -> Result<Self> {
        if j == k {
            return Err(Error::OutOfRange(format!("perturbation of self-link {j}")));
        }
        Ok(LinkPerturbation { j, k })
    }
}

/// Central difference with step `FD_STEP`, replaced by a Richardson
/// extrapolation when it disagrees with the step-`10 h` estimate by more
/// than 1e-3 in relative terms.
pub fn central_difference<F>(mut f: F, x: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut cd = |h: f64| -> Result<f64> { Ok((f(x + h)? - f(x - h)?) / (2.0 * h)) };
    let fine = cd(FD_STEP)?;
    let coarse = cd(10.0 * FD_STEP)?;
    if (fine - coarse).abs() <= 1e-3 * fine.abs().max(f64::MIN_POSITIVE) {
        return Ok(fine);
    }
    let half = cd(0.5 * FD_STEP)?;
    Ok((4.0 * half - fine) / 3.0)
}

fn inverse_on_support(net: &WeightedNetwork, contract: &OptimalContract) -> Result<DMatrix<f64>> {
    if contract.solution.degenerate {
        return Err(Error::SingularSubnetwork(f64::INFINITY));
    }
    net.restrict(&contract.active_set)?
        .weights()
        .clone()
        .try_inverse()
        .ok_or(Error::SingularSubnetwork(f64::INFINITY))
}

fn reoptimize(
    net: &WeightedNetwork,
    model: &SuccessModel,
    contract: &OptimalContract,
    pert: LinkPerturbation,
    w: f64,
) -> Result<OptimalContract> {
    let perturbed = net.with_link(pert.j, pert.k, w)?;
    let opts = SearchOptions::default();
    let out = optimize_with(&perturbed, model, contract.objective, &opts)?;
    if out.active_set != contract.active_set {
        return Err(Error::ActiveSetUnstable(w));
    }
    Ok(out)
}

/// `d sigma* / d G_jk` for every agent (zero off the support).
///
/// Uses `-(W^-1)_ik sigma_j - (W^-1)_ij sigma_k + (dc/dG_jk) sigma_i / c`.
/// Under success probability `dc/dG_jk = 2 c^2 x_j x_k / s`; under residual
/// profit `dc/dG_jk` is taken by finite differences of the optimizer.
pub fn d_shares_d_weight(
    net: &WeightedNetwork,
    model: &SuccessModel,
    contract: &OptimalContract,
    pert: LinkPerturbation,
) -> Result<Vec<f64>> {
    let set = &contract.active_set;
    let (pj, pk) = match (set.position(pert.j), set.position(pert.k)) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(Error::OutOfRange(format!(
                "link ({}, {}) leaves the support",
                pert.j, pert.k
            )))
        }
    };
    let w = net.weight(pert.j, pert.k);
    for trial in [w + FD_STEP, w - FD_STEP] {
        if trial >= 0.0 {
            reoptimize(net, model, contract, pert, trial)?;
        }
    }
    let inv = inverse_on_support(net, contract)?;
    let sol = &contract.solution;
    let c = sol.c;
    let dc = match contract.objective {
        Objective::SuccessProbability => {
            let x = &contract.solution.x;
            let unit_c = c / sol.total;
            2.0 * unit_c * unit_c * x[pj] * x[pk] * sol.total
        }
        Objective::ResidualProfit => central_difference(|v| Ok(reoptimize(net, model, contract, pert, v)?.c), w)?,
    };
    let shares = contract.allocation.shares();
    let mut out = vec![0.0; net.n()];
    for (pi, &i) in set.members().iter().enumerate() {
        out[i] = -inv[(pi, pk)] * shares[pert.j] - inv[(pi, pj)] * shares[pert.k] + dc * shares[i] / c;
    }
    Ok(out)
}

/// `d (sigma_a / sigma_b)` from share derivatives.
pub fn ratio_derivative(shares: &[f64], d_shares: &[f64], a: usize, b: usize) -> f64 {
    (d_shares[a] * shares[b] - shares[a] * d_shares[b]) / (shares[b] * shares[b])
}

/// `d Y* / d G_ij` at the optimal contract:
/// `beta sigma_i sigma_j P'^2 (2 / D^3 + 1 / D^2) / (1 - P'' s / D^3)` with
/// `D = 1 - beta c P'`.
pub fn d_performance_d_weight(model: &SuccessModel, contract: &OptimalContract, i: usize, j: usize) -> Result<f64> {
    let shares = contract.allocation.shares();
    if i == j || shares.get(i).is_none_or(|&s| s <= 0.0) || shares.get(j).is_none_or(|&s| s <= 0.0) {
        return Err(Error::OutOfRange(format!("pair ({i}, {j}) is not an active link pair")));
    }
    let y = contract.equilibrium.performance;
    let p = model.deriv(y)?;
    let p2 = model.second_deriv(y)?;
    let d = 1.0 - model.beta() * contract.c * p;
    let num = model.beta() * shares[i] * shares[j] * p * p * (2.0 / d.powi(3) + 1.0 / (d * d));
    Ok(num / (1.0 - p2 * contract.s_star / d.powi(3)))
}

/// Optimal residual-profit total share for `P(Y) = alpha Y` at each `beta`,
/// on the network's best support.
pub fn total_share_curve(net: &WeightedNetwork, alpha: f64, betas: &[f64]) -> Result<Vec<f64>> {
    let report = crate::extensive::search_active_set(net, &SearchOptions::default())?;
    let k_star = report.best.solution.k_star;
    betas.iter().map(|&b| rp_linear_closed_form(k_star, alpha, b)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::solve_equilibrium;
    use crate::network::three_agent;
    use crate::objective::optimize;
    use approx::assert_relative_eq;

    fn sp(net: &WeightedNetwork, model: &SuccessModel) -> OptimalContract {
        optimize(net, model, Objective::SuccessProbability).unwrap()
    }

    #[test]
    fn sp_share_derivative_matches_differences() {
        let net = three_agent(0.8, 0.6).unwrap();
        let model = SuccessModel::linear(0.9, 0.1).unwrap();
        let contract = sp(&net, &model);
        let pert = LinkPerturbation::new(1, 2).unwrap();
        let d = d_shares_d_weight(&net, &model, &contract, pert).unwrap();
        for i in 0..3 {
            let fd =
                central_difference(|w| Ok(sp(&net.with_link(1, 2, w)?, &model).allocation.shares()[i]), 0.6).unwrap();
            assert_relative_eq!(d[i], fd, max_relative = 1e-5);
        }
        assert!(ratio_derivative(contract.allocation.shares(), &d, 1, 2) < 0.0);
    }

    #[test]
    fn rp_share_derivative_matches_differences() {
        let net = three_agent(0.8, 0.6).unwrap();
        let model = SuccessModel::linear(0.9, 0.1).unwrap();
        let contract = optimize(&net, &model, Objective::ResidualProfit).unwrap();
        let pert = LinkPerturbation::new(0, 2).unwrap();
        let d = d_shares_d_weight(&net, &model, &contract, pert).unwrap();
        for i in 0..3 {
            let fd = central_difference(
                |w| {
                    Ok(optimize(&net.with_link(0, 2, w)?, &model, Objective::ResidualProfit)?
                        .allocation
                        .shares()[i])
                },
                0.8,
            )
            .unwrap();
            assert_relative_eq!(d[i], fd, max_relative = 1e-4);
        }
    }

    #[test]
    fn symmetric_pair_only_moves_through_c() {
        let net = WeightedNetwork::from_edges(2, &[(0, 1, 1.0)]).unwrap();
        let model = SuccessModel::linear(0.5, 0.5).unwrap();
        let contract = sp(&net, &model);
        let d = d_shares_d_weight(&net, &model, &contract, LinkPerturbation::new(0, 1).unwrap()).unwrap();
        for v in d {
            assert!(v.abs() < 1e-15);
        }
    }

    #[test]
    fn unstable_support_is_reported() {
        // Two disjoint pairs whose weights differ by less than the step.
        let net = WeightedNetwork::from_edges(4, &[(0, 1, 1.0), (2, 3, 1.0 + 1e-6)]).unwrap();
        let model = SuccessModel::linear(0.9, 0.1).unwrap();
        let contract = sp(&net, &model);
        let r = d_shares_d_weight(&net, &model, &contract, LinkPerturbation::new(2, 3).unwrap());
        assert!(matches!(r, Err(Error::ActiveSetUnstable(_))), "{r:?}");
    }

    #[test]
    fn performance_derivative_structure() {
        let net = three_agent(0.8, 0.6).unwrap();
        for model in [
            SuccessModel::linear(0.9, 0.1).unwrap(),
            SuccessModel::saturating(0.9, 1.0, 0.5).unwrap(),
        ] {
            let contract = sp(&net, &model);
            let s = contract.allocation.shares();
            let d12 = d_performance_d_weight(&model, &contract, 0, 1).unwrap();
            let d13 = d_performance_d_weight(&model, &contract, 0, 2).unwrap();
            assert_relative_eq!(d12 / d13, s[1] / s[2], max_relative = 1e-12);
            assert_relative_eq!(d12 / d13, 1.6, max_relative = 1e-12);
            // Shares held fixed while the link moves.
            let fd = central_difference(
                |w| Ok(solve_equilibrium(&net.with_link(0, 1, w)?, &model, &contract.allocation)?.performance),
                1.0,
            )
            .unwrap();
            assert_relative_eq!(d12, fd, max_relative = 1e-4);
        }
    }

    #[test]
    fn linear_performance_derivative_has_unit_denominator() {
        let net = three_agent(0.8, 0.6).unwrap();
        let model = SuccessModel::linear(0.9, 0.1).unwrap();
        let contract = sp(&net, &model);
        let s = contract.allocation.shares();
        let d = 1.0 - 0.1 * contract.c * 0.9;
        let expected = 0.1 * s[0] * s[1] * 0.81 * (2.0 / d.powi(3) + 1.0 / (d * d));
        assert_relative_eq!(
            d_performance_d_weight(&model, &contract, 0, 1).unwrap(),
            expected,
            max_relative = 1e-15
        );
    }

    #[test]
    fn total_share_increases_in_beta() {
        let net = WeightedNetwork::from_edges(2, &[(0, 1, 1.0)]).unwrap();
        let curve = total_share_curve(&net, 0.5, &[0.1, 0.5, 1.0]).unwrap();
        assert!(curve[0] > 0.5 && curve[0] < curve[1] && curve[1] < curve[2]);
        assert_relative_eq!(curve[1], rp_linear_closed_form(2.0, 0.5, 0.5).unwrap());
    }
}
