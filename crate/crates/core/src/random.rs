//! Seeded generators for networks, allocations and simplex points.

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::equilibrium::EquityAllocation;
use crate::network::WeightedNetwork;

/// Erdos-Renyi graph with weights uniform on `[0.1, 1]`. Redraws until at
/// least one link exists.
pub fn weighted_network<R: Rng>(rng: &mut R, n: usize, edge_prob: f64) -> WeightedNetwork {
    network(rng, n, edge_prob, true)
}

/// Erdos-Renyi graph with unit weights. Redraws until at least one link exists.
pub fn unweighted_network<R: Rng>(rng: &mut R, n: usize, edge_prob: f64) -> WeightedNetwork {
    network(rng, n, edge_prob, false)
}

fn network<R: Rng>(rng: &mut R, n: usize, edge_prob: f64, weighted: bool) -> WeightedNetwork {
    assert!(n >= 2, "need two agents for a link");
    loop {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.random_bool(edge_prob) {
                    let w = if weighted { rng.random_range(0.1..=1.0) } else { 1.0 };
                    edges.push((i, j, w));
                }
            }
        }
        if !edges.is_empty() {
            return WeightedNetwork::from_edges(n, &edges).expect("generated edges are valid");
        }
    }
}

/// Uniform point on the probability simplex in `R^n`.
pub fn simplex_point<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = e.iter().sum();
    e.into_iter().map(|v| v / total).collect()
}

/// Shares with a total uniform on `[0.1, 1]`, each agent zeroed with
/// probability `zero_prob`.
pub fn allocation<R: Rng>(rng: &mut R, n: usize, zero_prob: f64) -> EquityAllocation {
    let total = rng.random_range(0.1..=1.0);
    let mut shares: Vec<f64> = simplex_point(rng, n).into_iter().map(|v| v * total).collect();
    for s in &mut shares {
        if rng.random_bool(zero_prob) {
            *s = 0.0;
        }
    }
    EquityAllocation::new(shares).expect("scaled simplex point is feasible")
}
