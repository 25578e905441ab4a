//! Core game types: parameters, link intentions, realized networks, payoffs.
//!
//! Players simultaneously choose an effort level and a set of links to
//! initiate. Link formation is one-sided: an undirected link between `i` and
//! `j` exists as soon as either side initiates it, but only initiators pay
//! the link cost. Payoffs are linear-quadratic in own effort with pairwise
//! effort complementarities along realized links:
//!
//! ```text
//! pi_i = alpha*x_i - beta*x_i^2 + comp*x_i*sum_{k in N_i} x_k
//!        - link_cost*(links initiated by i) + link_benefit*(links received by i)
//! ```
//!
//! The `link_benefit` term models an exogenous per-received-link transfer and
//! is zero unless the treatment switches it on.

use serde::{Deserialize, Serialize};

/// Payoff and technology parameters shared by every player.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GameParams {
    /// Number of players in a group.
    pub n_players: usize,
    /// Linear effort benefit coefficient.
    pub alpha: f64,
    /// Quadratic effort cost coefficient.
    pub beta: f64,
    /// Complementarity strength on linked players' efforts.
    pub comp: f64,
    /// Cost paid per initiated link.
    pub link_cost: f64,
    /// Transfer received per incoming link initiation (0 unless switched on).
    pub link_benefit: f64,
    /// Upper bound of the effort choice set `[0, effort_max]`.
    pub effort_max: f64,
}

impl Default for GameParams {
    fn default() -> Self {
        GameParams {
            n_players: 5,
            alpha: 10.0,
            beta: 2.0,
            comp: 0.4,
            link_cost: 3.9,
            link_benefit: 0.0,
            effort_max: 20.0,
        }
    }
}

impl GameParams {
    /// Basic sanity checks: positive curvature, nonnegative costs, a
    /// nondegenerate effort interval, and at least two players.
    pub fn validate(&self) -> Result<(), String> {
        if self.n_players < 2 {
            return Err(format!("n_players must be at least 2, got {}", self.n_players));
        }
        if !(self.beta > 0.0) {
            return Err(format!("beta must be positive, got {}", self.beta));
        }
        if !(self.effort_max > 0.0) {
            return Err(format!("effort_max must be positive, got {}", self.effort_max));
        }
        for (name, v) in [
            ("alpha", self.alpha),
            ("comp", self.comp),
            ("link_cost", self.link_cost),
            ("link_benefit", self.link_benefit),
        ] {
            if !v.is_finite() {
                return Err(format!("{name} must be finite, got {v}"));
            }
        }
        if self.comp < 0.0 {
            return Err(format!("comp must be nonnegative, got {}", self.comp));
        }
        if self.link_cost < 0.0 {
            return Err(format!("link_cost must be nonnegative, got {}", self.link_cost));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Intentions and realized networks
// ---------------------------------------------------------------------------

/// Directed link-initiation profile: `get(i, j)` is true when `i` initiates a
/// link toward `j`. The diagonal is always false.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Intentions {
    n: usize,
    init: Vec<bool>,
}

impl Intentions {
    pub fn new(n: usize) -> Self {
        Intentions { n, init: vec![false; n * n] }
    }

    /// Build from a list of directed pairs `(initiator, target)`.
    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Self {
        let mut it = Intentions::new(n);
        for &(i, j) in pairs {
            it.set(i, j, true);
        }
        it
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.init[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        assert!(i != j, "players cannot link to themselves");
        self.init[i * self.n + j] = v;
    }

    /// Number of links initiated by `i` (out-degree).
    pub fn initiated(&self, i: usize) -> usize {
        (0..self.n).filter(|&j| self.get(i, j)).count()
    }

    /// Number of initiations received by `i` (in-degree).
    pub fn received(&self, i: usize) -> usize {
        (0..self.n).filter(|&j| self.get(j, i)).count()
    }

    /// Total number of directed initiations.
    pub fn total_initiations(&self) -> usize {
        self.init.iter().filter(|&&b| b).count()
    }

    /// Apply a relabeling `perm` (player `i` becomes `perm[i]`).
    pub fn relabel(&self, perm: &[usize]) -> Intentions {
        let mut out = Intentions::new(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                if self.get(i, j) {
                    out.set(perm[i], perm[j], true);
                }
            }
        }
        out
    }
}

/// Undirected realized network.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Network {
    n: usize,
    adj: Vec<bool>,
}

impl Network {
    pub fn empty(n: usize) -> Self {
        Network { n, adj: vec![false; n * n] }
    }

    pub fn complete(n: usize) -> Self {
        let mut net = Network::empty(n);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    net.adj[i * n + j] = true;
                }
            }
        }
        net
    }

    /// Star with the given center linked to every other player.
    pub fn star(n: usize, center: usize) -> Self {
        let mut net = Network::empty(n);
        for j in 0..n {
            if j != center {
                net.set_edge(center, j, true);
            }
        }
        net
    }

    /// Build from an undirected edge list.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut net = Network::empty(n);
        for &(i, j) in edges {
            net.set_edge(i, j, true);
        }
        net
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i * self.n + j]
    }

    pub fn set_edge(&mut self, i: usize, j: usize, v: bool) {
        assert!(i != j, "no self-loops");
        self.adj[i * self.n + j] = v;
        self.adj[j * self.n + i] = v;
    }

    pub fn degree(&self, i: usize) -> usize {
        (0..self.n).filter(|&j| self.has_edge(i, j)).count()
    }

    pub fn edge_count(&self) -> usize {
        (0..self.n).map(|i| self.degree(i)).sum::<usize>() / 2
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in i + 1..self.n {
                if self.has_edge(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Sum of neighbors' efforts for player `i`.
    pub fn neighbor_effort_sum(&self, i: usize, efforts: &[f64]) -> f64 {
        (0..self.n)
            .filter(|&j| self.has_edge(i, j))
            .map(|j| efforts[j])
            .sum()
    }

    pub fn relabel(&self, perm: &[usize]) -> Network {
        let mut out = Network::empty(self.n);
        for i in 0..self.n {
            for j in i + 1..self.n {
                if self.has_edge(i, j) {
                    out.set_edge(perm[i], perm[j], true);
                }
            }
        }
        out
    }
}

/// Realized network under one-sided formation: the undirected edge `{i, j}`
/// exists iff `i` initiates toward `j` or `j` initiates toward `i`.
pub fn realize_network(intentions: &Intentions) -> Network {
    let n = intentions.n();
    let mut net = Network::empty(n);
    for i in 0..n {
        for j in i + 1..n {
            if intentions.get(i, j) || intentions.get(j, i) {
                net.set_edge(i, j, true);
            }
        }
    }
    net
}

// ---------------------------------------------------------------------------
// Payoffs
// ---------------------------------------------------------------------------

/// Additive payoff decomposition. `total = effort_benefit - effort_cost
/// - link_cost_paid + link_benefit_received`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PayoffBreakdown {
    /// `alpha*x_i + comp*x_i*sum of neighbor efforts`.
    pub effort_benefit: f64,
    /// `beta*x_i^2`.
    pub effort_cost: f64,
    /// `link_cost` times links initiated by `i`.
    pub link_cost_paid: f64,
    /// `link_benefit` times initiations received by `i`.
    pub link_benefit_received: f64,
}

impl PayoffBreakdown {
    pub fn total(&self) -> f64 {
        self.effort_benefit - self.effort_cost - self.link_cost_paid + self.link_benefit_received
    }
}

/// Payoff components for player `i` given efforts and the intention profile.
pub fn payoff_breakdown(
    i: usize,
    efforts: &[f64],
    intentions: &Intentions,
    params: &GameParams,
) -> PayoffBreakdown {
    assert_eq!(efforts.len(), intentions.n(), "one effort per player");
    let network = realize_network(intentions);
    let x = efforts[i];
    let neighbor_sum = network.neighbor_effort_sum(i, efforts);
    PayoffBreakdown {
        effort_benefit: params.alpha * x + params.comp * x * neighbor_sum,
        effort_cost: params.beta * x * x,
        link_cost_paid: params.link_cost * intentions.initiated(i) as f64,
        link_benefit_received: params.link_benefit * intentions.received(i) as f64,
    }
}

/// Total payoff for player `i`.
pub fn payoff(i: usize, efforts: &[f64], intentions: &Intentions, params: &GameParams) -> f64 {
    payoff_breakdown(i, efforts, intentions, params).total()
}

/// Payoff vector for every player.
pub fn payoffs(efforts: &[f64], intentions: &Intentions, params: &GameParams) -> Vec<f64> {
    (0..intentions.n())
        .map(|i| payoff(i, efforts, intentions, params))
        .collect()
}

/// Marginal payoff change for a player with effort `x_i` from adding one link
/// to a player with effort `x_j`: the complementarity gain `comp*x_i*x_j`,
/// minus the link cost when the player is the initiating side.
pub fn link_gain(x_i: f64, x_j: f64, initiator: bool, params: &GameParams) -> f64 {
    params.comp * x_i * x_j - if initiator { params.link_cost } else { 0.0 }
}

/// Competition ranking of payoffs: rank 1 is the highest payoff and tied
/// players share the smallest rank of their tie group (`1, 2, 2, 4, ...`).
pub fn rank_players(payoffs: &[f64]) -> Vec<usize> {
    payoffs
        .iter()
        .map(|&p| 1 + payoffs.iter().filter(|&&q| q > p).count())
        .collect()
}

/// Ranks greater than `n - 2`, i.e. the bottom two rank positions of a group.
pub fn is_bottom_two(rank: usize, n: usize) -> bool {
    rank + 2 > n
}
