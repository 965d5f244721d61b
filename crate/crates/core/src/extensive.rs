//! Choice of the active set.
//!
//! For a fixed total share, performance is increasing in the balanced
//! constant `c`, so the best support is the one with the largest `c / s`.
//! Optimal supports have diameter at most two, which prunes enumeration
//! soundly; on unweighted networks any maximum clique is optimal.

use serde::Serialize;

use crate::intensive::{allocate_on_set, IntensiveSolution};
use crate::network::{AgentSet, WeightedNetwork};
use crate::{par, Error, Result};

/// Relative tolerance for treating two supports as tied.
pub const TIE_TOL: f64 = 1e-9;
/// Largest network the brute-force oracle accepts.
pub const ORACLE_MAX_N: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    pub max_n_enum: usize,
    pub prune_diameter: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            max_n_enum: 16,
            prune_diameter: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActiveSetCandidate {
    pub set: AgentSet,
    /// `c / s`, equal to `1 / k*`.
    pub c_per_unit: f64,
    /// Balanced allocation at `s = 1`.
    pub solution: IntensiveSolution,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMethod {
    Enumeration,
    Clique,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchReport {
    pub best: ActiveSetCandidate,
    /// All candidates within [`TIE_TOL`] of the best, in enumeration order.
    pub ties: Vec<ActiveSetCandidate>,
    pub evaluated: usize,
    pub pruned_by_diameter: usize,
    pub method: SearchMethod,
}

/// Nonempty subsets of `0..n`, by cardinality and then lexicographically.
fn subsets_in_order(n: usize) -> Vec<AgentSet> {
    let mut sets: Vec<AgentSet> = (1..1u64 << n).map(|m| AgentSet::from_mask(m, n)).collect();
    sets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.members().cmp(b.members())));
    sets
}

enum Outcome {
    Pruned,
    Skipped,
    Rejected,
    Valid(ActiveSetCandidate),
}

fn evaluate(net: &WeightedNetwork, set: &AgentSet, prune: bool) -> Result<Outcome> {
    if prune {
        if set.len() == 1 {
            return Ok(Outcome::Skipped);
        }
        match net.diameter(set)? {
            Some(d) if d <= 2 => {}
            _ => return Ok(Outcome::Pruned),
        }
    }
    match allocate_on_set(net, set, 1.0) {
        Ok(solution) => Ok(Outcome::Valid(ActiveSetCandidate {
            set: set.clone(),
            c_per_unit: solution.c,
            solution,
        })),
        Err(Error::InvalidActiveSet) | Err(Error::SingularSubnetwork(_)) => Ok(Outcome::Rejected),
        Err(e) => Err(e),
    }
}

fn enumerate(net: &WeightedNetwork, prune: bool) -> Result<SearchReport> {
    let sets = subsets_in_order(net.n());
    let outcomes = par::map(&sets, |s| evaluate(net, s, prune));
    let mut evaluated = 0;
    let mut pruned_by_diameter = 0;
    let mut valid = Vec::new();
    for outcome in outcomes {
        match outcome? {
            Outcome::Pruned => pruned_by_diameter += 1,
            Outcome::Skipped => {}
            Outcome::Rejected => evaluated += 1,
            Outcome::Valid(c) => {
                evaluated += 1;
                valid.push(c);
            }
        }
    }
    let top = valid.iter().map(|c| c.c_per_unit).fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return Err(Error::InvalidActiveSet);
    }
    let ties: Vec<ActiveSetCandidate> = valid
        .into_iter()
        .filter(|c| top - c.c_per_unit <= TIE_TOL * top)
        .collect();
    Ok(SearchReport {
        best: ties[0].clone(),
        ties,
        evaluated,
        pruned_by_diameter,
        method: SearchMethod::Enumeration,
    })
}

/// Best active set by pruned enumeration, or by the clique path for large
/// unweighted networks.
pub fn search_active_set(net: &WeightedNetwork, opts: &SearchOptions) -> Result<SearchReport> {
    if net.n() <= opts.max_n_enum {
        if net.n() > 63 {
            return Err(Error::TooLargeForEnumeration { n: net.n(), cap: 63 });
        }
        enumerate(net, opts.prune_diameter)
    } else if net.is_unweighted() {
        search_active_set_unweighted(net)
    } else {
        Err(Error::TooLargeForEnumeration {
            n: net.n(),
            cap: opts.max_n_enum,
        })
    }
}

/// Lexicographically first maximum clique with equal shares.
pub fn search_active_set_unweighted(net: &WeightedNetwork) -> Result<SearchReport> {
    if !net.is_unweighted() {
        return Err(Error::NotUnweighted);
    }
    let set = net.max_clique()?;
    let solution = allocate_on_set(net, &set, 1.0)?;
    let best = ActiveSetCandidate {
        set,
        c_per_unit: solution.c,
        solution,
    };
    Ok(SearchReport {
        ties: vec![best.clone()],
        best,
        evaluated: 1,
        pruned_by_diameter: 0,
        method: SearchMethod::Clique,
    })
}

/// Exhaustive search with no pruning at all; a reference for tests.
pub fn brute_force_oracle(net: &WeightedNetwork) -> Result<SearchReport> {
    if net.n() > ORACLE_MAX_N {
        return Err(Error::TooLargeForEnumeration {
            n: net.n(),
            cap: ORACLE_MAX_N,
        });
    }
    enumerate(net, false)
}
