//! Weighted undirected complementarity networks.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Weights at or below this count as absent links for connectivity.
pub const LINK_EPS: f64 = 1e-12;

/// Symmetric nonnegative weight matrix with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedNetwork {
    weights: DMatrix<f64>,
}

/// Sorted set of distinct agent indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentSet(Vec<usize>);

impl AgentSet {
    /// Builds a set from arbitrary-order members; duplicates are rejected.
    pub fn new(mut members: Vec<usize>) -> Result<Self> {
        members.sort_unstable();
        if members.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidAllocation("duplicate agent in set".into()));
        }
        Ok(AgentSet(members))
    }

    pub fn all(n: usize) -> Self {
        AgentSet((0..n).collect())
    }

    /// Agents whose bit is set in `mask`.
    pub fn from_mask(mask: u64, n: usize) -> Self {
        AgentSet((0..n).filter(|&i| mask >> i & 1 == 1).collect())
    }

    pub fn members(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    /// Position of agent `i` inside the set, if present.
    pub fn position(&self, i: usize) -> Option<usize> {
        self.0.binary_search(&i).ok()
    }

    /// Bitmask with bit `i` set for each member `i < 64`.
    pub fn mask(&self) -> u64 {
        self.0.iter().filter(|&&i| i < 64).fold(0, |m, &i| m | 1 << i)
    }
}

impl fmt::Display for AgentSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct NetworkFile {
    n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    edges: Option<Vec<(usize, usize, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    matrix: Option<Vec<f64>>,
}

impl WeightedNetwork {
    /// Builds a network from a row-major `n x n` matrix.
    ///
    /// Asymmetric input is replaced by `(G + G^T) / 2`, which leaves team
    /// performance unchanged; a warning is logged when that happens.
    pub fn from_matrix(n: usize, row_major: &[f64]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidNetwork("n must be positive".into()));
        }
        if row_major.len() != n * n {
            return Err(Error::InvalidNetwork(format!(
                "expected {} matrix entries, got {}",
                n * n,
                row_major.len()
            )));
        }
        let mut g = DMatrix::from_row_slice(n, n, row_major);
        for (k, &w) in g.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidNetwork(format!(
                    "weight at ({}, {}) must be finite and nonnegative",
                    k % n,
                    k / n
                )));
            }
        }
        if (0..n).any(|i| g[(i, i)] != 0.0) {
            return Err(Error::InvalidNetwork("self-links are not allowed".into()));
        }
        if g != g.transpose() {
            log::warn!("asymmetric weight matrix replaced by its symmetric part");
            g = (&g + g.transpose()) * 0.5;
        }
        if g.iter().all(|&w| w == 0.0) {
            return Err(Error::InvalidNetwork("network has no links".into()));
        }
        Ok(WeightedNetwork { weights: g })
    }

    /// Builds a network from an undirected edge list `(i, j, w)`.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut m = vec![0.0; n * n];
        let mut seen = HashSet::new();
        for &(i, j, w) in edges {
            if i >= n || j >= n {
                return Err(Error::IndexOutOfRange(i.max(j)));
            }
            if i == j {
                return Err(Error::InvalidNetwork("self-links are not allowed".into()));
            }
            if !seen.insert((i.min(j), i.max(j))) {
                return Err(Error::InvalidNetwork(format!("duplicate edge ({i}, {j})")));
            }
            m[i * n + j] = w;
            m[j * n + i] = w;
        }
        Self::from_matrix(n, &m)
    }

    /// Parses `{"n": .., "edges": [[i, j, w], ..]}` or `{"n": .., "matrix": [..]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: NetworkFile = serde_json::from_str(text)?;
        match (file.edges, file.matrix) {
            (Some(edges), None) => Self::from_edges(file.n, &edges),
            (None, Some(matrix)) => Self::from_matrix(file.n, &matrix),
            _ => Err(Error::Parse(
                "exactly one of \"edges\" or \"matrix\" is required".into(),
            )),
        }
    }

    /// Serializes as `{"n": .., "matrix": [..]}`.
    pub fn to_json(&self) -> String {
        let n = self.n();
        let matrix = (0..n * n).map(|k| self.weights[(k / n, k % n)]).collect();
        serde_json::to_string(&NetworkFile {
            n,
            edges: None,
            matrix: Some(matrix),
        })
        .expect("network serializes")
    }

    pub(crate) fn from_matrix_unchecked(weights: DMatrix<f64>) -> Self {
        WeightedNetwork { weights }
    }

    pub fn n(&self) -> usize {
        self.weights.nrows()
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[(i, j)]
    }

    /// Copy of the network with the undirected link `{i, j}` set to `w`.
    pub fn with_link(&self, i: usize, j: usize, w: f64) -> Result<Self> {
        let n = self.n();
        if i >= n || j >= n {
            return Err(Error::IndexOutOfRange(i.max(j)));
        }
        if i == j || !w.is_finite() || w < 0.0 {
            return Err(Error::InvalidNetwork(format!("cannot set link ({i}, {j}) to {w}")));
        }
        let mut g = self.weights.clone();
        g[(i, j)] = w;
        g[(j, i)] = w;
        if g.iter().all(|&v| v == 0.0) {
            return Err(Error::InvalidNetwork("network has no links".into()));
        }
        Ok(WeightedNetwork { weights: g })
    }

    fn check_set(&self, set: &AgentSet) -> Result<()> {
        if set.is_empty() {
            return Err(Error::EmptySet);
        }
        match set.members().iter().find(|&&i| i >= self.n()) {
            Some(&i) => Err(Error::IndexOutOfRange(i)),
            None => Ok(()),
        }
    }

    /// Principal submatrix on `set`, in the set's index order. The result
    /// may have no links.
    pub fn restrict(&self, set: &AgentSet) -> Result<WeightedNetwork> {
        self.check_set(set)?;
        let idx = set.members();
        let m = idx.len();
        let sub = DMatrix::from_fn(m, m, |r, c| self.weights[(idx[r], idx[c])]);
        Ok(WeightedNetwork { weights: sub })
    }

    /// Hop-count diameter of the subgraph induced by `set`, counting links
    /// heavier than [`LINK_EPS`]. `None` means the subgraph is disconnected.
    pub fn diameter(&self, set: &AgentSet) -> Result<Option<usize>> {
        self.check_set(set)?;
        let idx = set.members();
        let m = idx.len();
        let mut diameter = 0;
        let mut dist = vec![usize::MAX; m];
        let mut queue = VecDeque::new();
        for source in 0..m {
            dist.fill(usize::MAX);
            dist[source] = 0;
            queue.push_back(source);
            while let Some(u) = queue.pop_front() {
                for v in 0..m {
                    if dist[v] == usize::MAX && self.weights[(idx[u], idx[v])] > LINK_EPS {
                        dist[v] = dist[u] + 1;
                        queue.push_back(v);
                    }
                }
            }
            for &d in &dist {
                if d == usize::MAX {
                    return Ok(None);
                }
                diameter = diameter.max(d);
            }
        }
        Ok(Some(diameter))
    }

    /// True iff every weight is exactly 0 or 1.
    pub fn is_unweighted(&self) -> bool {
        self.weights.iter().all(|&w| w == 0.0 || w == 1.0)
    }

    /// A maximum clique; among several, the lexicographically smallest
    /// member list.
    pub fn max_clique(&self) -> Result<AgentSet> {
        if !self.is_unweighted() {
            return Err(Error::NotUnweighted);
        }
        let n = self.n();
        let adj: Vec<Vec<bool>> = (0..n)
            .map(|i| (0..n).map(|j| self.weights[(i, j)] == 1.0).collect())
            .collect();
        let mut clique = CliqueSearch {
            adj: &adj,
            best: Vec::new(),
        };
        clique.expand(&mut Vec::new(), (0..n).collect());
        let target = clique.best.len();
        let mut found = Vec::new();
        let located = clique.lex_first(&mut found, (0..n).collect(), target);
        debug_assert!(located);
        Ok(AgentSet(found))
    }
}

struct CliqueSearch<'a> {
    adj: &'a [Vec<bool>],
    best: Vec<usize>,
}

impl CliqueSearch<'_> {
    /// Greedy sequential colouring of `cands`; returns vertices ordered by
    /// colour class together with each vertex's colour (1-based).
    fn colour(&self, cands: &[usize]) -> (Vec<usize>, Vec<usize>) {
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for &v in cands {
            match classes.iter_mut().find(|cls| cls.iter().all(|&u| !self.adj[u][v])) {
                Some(cls) => cls.push(v),
                None => classes.push(vec![v]),
            }
        }
        let mut order = Vec::with_capacity(cands.len());
        let mut colours = Vec::with_capacity(cands.len());
        for (k, cls) in classes.iter().enumerate() {
            for &v in cls {
                order.push(v);
                colours.push(k + 1);
            }
        }
        (order, colours)
    }

    /// Branch and bound for the clique number, pruned by colour counts.
    fn expand(&mut self, current: &mut Vec<usize>, cands: Vec<usize>) {
        let (order, colours) = self.colour(&cands);
        let mut remaining: Vec<usize> = order.clone();
        for k in (0..order.len()).rev() {
            if current.len() + colours[k] <= self.best.len() {
                return;
            }
            let v = order[k];
            current.push(v);
            let next: Vec<usize> = remaining.iter().copied().filter(|&u| self.adj[v][u]).collect();
            if next.is_empty() {
                if current.len() > self.best.len() {
                    self.best = current.clone();
                }
            } else {
                self.expand(current, next);
            }
            current.pop();
            remaining.retain(|&u| u != v);
        }
    }

    /// Depth-first search in increasing index order for the first clique of
    /// size `target`, which is the lexicographically smallest one.
    fn lex_first(&self, current: &mut Vec<usize>, cands: Vec<usize>, target: usize) -> bool {
        if current.len() == target {
            return true;
        }
        let (_, colours) = self.colour(&cands);
        if current.len() + colours.last().copied().unwrap_or(0) < target {
            return false;
        }
        for (k, &v) in cands.iter().enumerate() {
            if current.len() + cands.len() - k < target {
                return false;
            }
            current.push(v);
            let next: Vec<usize> = cands[k + 1..].iter().copied().filter(|&u| self.adj[v][u]).collect();
            if self.lex_first(current, next, target) {
                return true;
            }
            current.pop();
        }
        false
    }
}

/// Complete unweighted graph on `n` agents.
pub fn complete(n: usize) -> WeightedNetwork {
    WeightedNetwork::from_matrix_unchecked(DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { 1.0 }))
}

/// Unweighted star with centre 0 and `leaves` peripheral agents.
pub fn star(leaves: usize) -> WeightedNetwork {
    let n = leaves + 1;
    WeightedNetwork::from_matrix_unchecked(DMatrix::from_fn(n, n, |i, j| {
        if i != j && (i == 0 || j == 0) {
            1.0
        } else {
            0.0
        }
    }))
}

/// Unweighted cycle on `n` agents.
pub fn cycle(n: usize) -> WeightedNetwork {
    WeightedNetwork::from_matrix_unchecked(DMatrix::from_fn(n, n, |i, j| {
        let d = i.abs_diff(j);
        if d == 1 || d == n - 1 {
            1.0
        } else {
            0.0
        }
    }))
}

/// Unweighted path `0 - 1 - ... - (n-1)`.
pub fn path(n: usize) -> WeightedNetwork {
    WeightedNetwork::from_matrix_unchecked(DMatrix::from_fn(
        n,
        n,
        |i, j| {
            if i.abs_diff(j) == 1 {
                1.0
            } else {
                0.0
            }
        },
    ))
}

/// Even-sized circle where every agent links to all others except the
/// diametrically opposite one.
pub fn circle_without_opposites(n: usize) -> WeightedNetwork {
    WeightedNetwork::from_matrix_unchecked(DMatrix::from_fn(n, n, |i, j| {
        if i == j || i.abs_diff(j) == n / 2 {
            0.0
        } else {
            1.0
        }
    }))
}

/// Three agents with `G12 = 1`, `G13 = g13`, `G23 = g23`.
pub fn three_agent(g13: f64, g23: f64) -> Result<WeightedNetwork> {
    WeightedNetwork::from_matrix(3, &[0.0, 1.0, g13, 1.0, 0.0, g23, g13, g23, 0.0])
}
