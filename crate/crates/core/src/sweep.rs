//! Parameter sweeps of the optimal contract, written as CSV.
//!
//! Each point is solved from scratch. Rows come out in parameter order;
//! a failed point becomes a row of NaN and the sweep continues.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use crate::network::WeightedNetwork;
use crate::objective::{optimize, Objective};
use crate::success::SuccessModel;
use crate::{par, Error, Result};

/// Swept quantity: the weight of link `(i, j)` (0-based) or `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SweepParam {
    Link(usize, usize),
    Beta,
}

impl FromStr for SweepParam {
    type Err = Error;

    /// Accepts `beta` or `link(i,j)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "beta" {
            return Ok(SweepParam::Beta);
        }
        let bad = || Error::Parse(format!("expected beta or link(i,j), got {s:?}"));
        let inner = s
            .strip_prefix("link(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(bad)?;
        let (a, b) = inner.split_once(',').ok_or_else(bad)?;
        let i = a.trim().parse().map_err(|_| bad())?;
        let j = b.trim().parse().map_err(|_| bad())?;
        if i == j {
            return Err(bad());
        }
        Ok(SweepParam::Link(i, j))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub param: f64,
    pub shares: Vec<f64>,
    pub payoffs: Vec<f64>,
    pub performance: f64,
    pub c: f64,
    pub s: f64,
    /// Bit `i` set when agent `i` is active; `None` on a failed point.
    pub active_mask: Option<u64>,
}

impl SweepRow {
    fn failed(param: f64, n: usize) -> Self {
        SweepRow {
            param,
            shares: vec![f64::NAN; n],
            payoffs: vec![f64::NAN; n],
            performance: f64::NAN,
            c: f64::NAN,
            s: f64::NAN,
            active_mask: None,
        }
    }
}

/// `steps` evenly spaced values from `lo` to `hi` inclusive; a single value
/// when `steps <= 1` or the range is empty.
pub fn grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps <= 1 || lo == hi {
        return vec![lo];
    }
    (0..steps)
        .map(|k| lo + (hi - lo) * k as f64 / (steps - 1) as f64)
        .collect()
}

fn point(
    net: &WeightedNetwork,
    model: &SuccessModel,
    objective: Objective,
    param: SweepParam,
    v: f64,
) -> Result<SweepRow> {
    let (net, model) = match param {
        SweepParam::Link(i, j) => (net.with_link(i, j, v)?, *model),
        SweepParam::Beta => (net.clone(), model.with_beta(v)?),
    };
    let contract = optimize(&net, &model, objective)?;
    Ok(SweepRow {
        param: v,
        shares: contract.allocation.shares().to_vec(),
        payoffs: contract.equilibrium.agent_payoffs.clone(),
        performance: contract.equilibrium.performance,
        c: contract.c,
        s: contract.s_star,
        active_mask: Some(contract.active_set.mask()),
    })
}

pub fn sweep(
    net: &WeightedNetwork,
    model: &SuccessModel,
    objective: Objective,
    param: SweepParam,
    lo: f64,
    hi: f64,
    steps: usize,
) -> Result<Vec<SweepRow>> {
    if !lo.is_finite() || !hi.is_finite() || lo > hi {
        return Err(Error::OutOfRange(format!("sweep range {lo}:{hi}")));
    }
    if let SweepParam::Link(i, j) = param {
        if i.max(j) >= net.n() {
            return Err(Error::IndexOutOfRange(i.max(j)));
        }
    }
    let values = grid(lo, hi, steps);
    let rows = par::map(&values, |&v| {
        point(net, model, objective, param, v).unwrap_or_else(|e| {
            log::warn!("sweep point {v}: {e}");
            SweepRow::failed(v, net.n())
        })
    });
    Ok(rows)
}

/// `param,sigma_0..,U_0..,Y,c,s,active_mask`.
pub fn csv_header(n: usize) -> String {
    let mut cols = vec!["param".to_string()];
    cols.extend((0..n).map(|i| format!("sigma_{i}")));
    cols.extend((0..n).map(|i| format!("U_{i}")));
    cols.extend(["Y", "c", "s", "active_mask"].map(String::from));
    cols.join(",")
}

pub fn to_csv(rows: &[SweepRow], n: usize) -> String {
    let mut out = csv_header(n);
    out.push('\n');
    for r in rows {
        let mut fields = vec![r.param];
        fields.extend(&r.shares);
        fields.extend(&r.payoffs);
        fields.extend([r.performance, r.c, r.s]);
        let line: Vec<String> = fields.iter().map(|v| v.to_string()).collect();
        let mask = r.active_mask.map_or_else(|| "NaN".to_string(), |m| m.to_string());
        let _ = writeln!(out, "{},{}", line.join(","), mask);
    }
    out
}
