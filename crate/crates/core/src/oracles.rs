//! Closed-form contracts used as references for the general solvers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::linalg::spectral_radius_sigma_g;
use crate::network::{AgentSet, WeightedNetwork};
use crate::{par, random, Error, Result};

/// Three agents with `G_12 = 1`, `G_13 = g13`, `G_23 = g23` and
/// `1 >= g13 >= g23 > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThreeAgentSpec {
    pub g13: f64,
    pub g23: f64,
}

impl ThreeAgentSpec {
    pub fn new(g13: f64, g23: f64) -> Result<Self> {
        if !(g13 <= 1.0 && g13 >= g23 && g23 > 0.0) {
            return Err(Error::BadNormalization);
        }
        Ok(ThreeAgentSpec { g13, g23 })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosedFormContract {
    pub active_set: AgentSet,
    pub shares: Vec<f64>,
    pub c: f64,
}

/// Optimal shares of total `s` in the three-agent network. All three are
/// active exactly when `g13 + g23 > 1`.
pub fn three_agent_contract(spec: ThreeAgentSpec, s: f64) -> Result<ClosedFormContract> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::OutOfRange(format!("total share {s}")));
    }
    let ThreeAgentSpec { g13: a, g23: b } = spec;
    if a + b <= 1.0 {
        return Ok(ClosedFormContract {
            active_set: AgentSet::new(vec![0, 1])?,
            shares: vec![s / 2.0, s / 2.0, 0.0],
            c: s / 2.0,
        });
    }
    let raw = [
        (1.0 + a - b) / (2.0 * a),
        (1.0 + b - a) / (2.0 * b),
        (a + b - 1.0) / (2.0 * a * b),
    ];
    let total: f64 = raw.iter().sum();
    Ok(ClosedFormContract {
        active_set: AgentSet::all(3),
        shares: raw.iter().map(|r| s * r / total).collect(),
        c: 2.0 * a * b * s / (2.0 * (a + b) - 1.0 - (a - b) * (a - b)),
    })
}

/// `sqrt(1 - g13) (sqrt 2 - sqrt(1 - g13))`, where `d(sigma_1 / sigma_2) / d G_23`
/// changes sign; defined for `g13` in `(1/2, 1)`.
pub fn g_star(g13: f64) -> Result<f64> {
    if !(g13 > 0.5 && g13 < 1.0) {
        return Err(Error::OutOfRange(format!("g13 = {g13} outside (1/2, 1)")));
    }
    let r = (1.0 - g13).sqrt();
    Ok(r * (2f64.sqrt() - r))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralCertificate {
    /// `rho(Sigma* G)`.
    pub rho_star: f64,
    /// Largest `rho(Sigma G)` over the sampled allocations.
    pub max_rival_rho: f64,
    /// `rho_star - max_rival_rho`.
    pub margin: f64,
}

/// Compares `rho(Sigma* G)` with `rho(Sigma G)` for `trials` allocations
/// drawn uniformly from the simplex. Trial `t` draws from stream `t` of a
/// generator seeded with `seed`, so the result does not depend on
/// scheduling.
pub fn spectral_radius_certificate(
    net: &WeightedNetwork,
    shares: &[f64],
    trials: usize,
    seed: u64,
) -> SpectralCertificate {
    let rho_star = spectral_radius_sigma_g(net.weights(), shares);
    let ids: Vec<u64> = (0..trials as u64).collect();
    let rivals = par::map(&ids, |&t| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(t);
        spectral_radius_sigma_g(net.weights(), &random::simplex_point(&mut rng, net.n()))
    });
    let max_rival_rho = rivals.into_iter().fold(0.0, f64::max);
    SpectralCertificate {
        rho_star,
        max_rival_rho,
        margin: rho_star - max_rival_rho,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleCase {
    /// Complete graph on `n` agents.
    Clique,
    /// `n` agents on a circle, each linked to all but the opposite agent.
    CirculantEx2,
    /// One center and `n - 1` leaves.
    Star,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosedFormFamily {
    pub c: f64,
    /// Optimal allocations attaining `c`.
    pub witnesses: Vec<Vec<f64>>,
}

/// Optimal `c` and witness allocations of total `s` for standard families.
pub fn clique_circle_star_oracle(case: OracleCase, n: usize, s: f64) -> Result<ClosedFormFamily> {
    let bad = || Error::OutOfRange(format!("n = {n} invalid for {case:?}"));
    let nf = n as f64;
    match case {
        OracleCase::Clique => {
            if n < 2 {
                return Err(bad());
            }
            Ok(ClosedFormFamily {
                c: (nf - 1.0) * s / nf,
                witnesses: vec![vec![s / nf; n]],
            })
        }
        OracleCase::CirculantEx2 => {
            if n < 4 || n % 2 == 1 {
                return Err(bad());
            }
            // Agents 0..n/2 contain no opposite pair, so they form a clique.
            let half = n / 2;
            let mut clique = vec![0.0; n];
            clique[..half].fill(s / half as f64);
            Ok(ClosedFormFamily {
                c: (nf - 2.0) * s / nf,
                witnesses: vec![vec![s / nf; n], clique],
            })
        }
        OracleCase::Star => {
            if n < 3 {
                return Err(bad());
            }
            let mut shares = vec![s / (2.0 * (nf - 1.0)); n];
            shares[0] = s / 2.0;
            Ok(ClosedFormFamily {
                c: s / 2.0,
                witnesses: vec![shares],
            })
        }
    }
}
