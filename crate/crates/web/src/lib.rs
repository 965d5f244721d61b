//! Browser bindings. Each export takes and returns JSON text so the page
//! needs no generated types; errors come back as rejected strings.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use equitynet::equilibrium::solve_equilibrium;
use equitynet::network::three_agent;
use equitynet::objective::{optimize, Objective};
use equitynet::sweep::{sweep, SweepParam};
use equitynet::{EquityAllocation, SuccessModel, WeightedNetwork};

fn text(v: Value) -> String {
    v.to_string()
}

/// Equilibrium of `network` under `model` for the given share array.
pub fn equilibrium(network: &str, model: &str, shares: &str) -> Result<String, String> {
    let net = WeightedNetwork::from_json(network).map_err(|e| e.to_string())?;
    let model = SuccessModel::from_json(model).map_err(|e| e.to_string())?;
    let shares: Vec<f64> = serde_json::from_str(shares).map_err(|e| e.to_string())?;
    let alloc = EquityAllocation::new(shares).map_err(|e| e.to_string())?;
    let eq = solve_equilibrium(&net, &model, &alloc).map_err(|e| e.to_string())?;
    Ok(text(json!(eq)))
}

/// Optimal contract; `objective` is `rp` or `sp`.
pub fn contract(network: &str, model: &str, objective: &str) -> Result<String, String> {
    let net = WeightedNetwork::from_json(network).map_err(|e| e.to_string())?;
    let model = SuccessModel::from_json(model).map_err(|e| e.to_string())?;
    let objective: Objective = objective.parse().map_err(|e: equitynet::Error| e.to_string())?;
    let c = optimize(&net, &model, objective).map_err(|e| e.to_string())?;
    Ok(text(json!({
        "active_set": c.active_set,
        "shares": c.allocation,
        "c": c.c,
        "s_star": c.s_star,
        "performance": c.equilibrium.performance,
        "objective_value": c.principal_value,
        "payoffs": c.equilibrium.agent_payoffs,
        "ties": c.ties.len(),
    })))
}

/// Optimal shares and payoffs in the three-agent network (`G_12 = 1`) as
/// `G_23` runs over `[lo, hi]`, with linear success probability `alpha Y`.
#[allow(clippy::too_many_arguments)]
pub fn three_agent_sweep(
    g13: f64,
    alpha: f64,
    beta: f64,
    objective: &str,
    lo: f64,
    hi: f64,
    steps: usize,
) -> Result<String, String> {
    let net = three_agent(g13, lo.max(0.0)).map_err(|e| e.to_string())?;
    let model = SuccessModel::linear(alpha, beta).map_err(|e| e.to_string())?;
    let objective: Objective = objective.parse().map_err(|e: equitynet::Error| e.to_string())?;
    let rows = sweep(&net, &model, objective, SweepParam::Link(1, 2), lo, hi, steps).map_err(|e| e.to_string())?;
    let rows: Vec<Value> = rows
        .iter()
        .map(|r| {
            let clean = |v: &[f64]| v.iter().map(|x| if x.is_finite() { json!(x) } else { Value::Null }).collect::<Vec<_>>();
            json!({ "g23": r.param, "shares": clean(&r.shares), "payoffs": clean(&r.payoffs), "s": r.s.is_finite().then_some(r.s) })
        })
        .collect();
    Ok(text(json!(rows)))
}

#[wasm_bindgen(js_name = equilibrium)]
pub fn equilibrium_js(network: &str, model: &str, shares: &str) -> Result<String, JsValue> {
    equilibrium(network, model, shares).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = optimize)]
pub fn contract_js(network: &str, model: &str, objective: &str) -> Result<String, JsValue> {
    contract(network, model, objective).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = threeAgentSweep)]
pub fn three_agent_sweep_js(
    g13: f64,
    alpha: f64,
    beta: f64,
    objective: &str,
    lo: f64,
    hi: f64,
    steps: usize,
) -> Result<String, JsValue> {
    three_agent_sweep(g13, alpha, beta, objective, lo, hi, steps).map_err(|e| JsValue::from_str(&e))
}
