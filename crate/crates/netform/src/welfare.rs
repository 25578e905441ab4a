//! Planner benchmarks: welfare-maximizing efforts on a fixed network and the
//! welfare-maximizing network.
//!
//! Total welfare counts each realized link's cost exactly once and excludes
//! the per-received-link transfer, which is financed outside the group:
//!
//! ```text
//! W(x, G) = sum_i [alpha*x_i - beta*x_i^2 + comp*x_i*sum_{k in N_i} x_k]
//!           - link_cost * |edges(G)|
//! ```
//!
//! The first-order conditions give `(2*beta*I - 2*comp*G) x = alpha*1` — the
//! complementarity term is counted from both endpoints — so the planner
//! problem is concave iff `beta > comp*lambda_max(G)`.

use crate::equilibrium::{adjacency_lambda_max, classify_network, NetworkClass};
use crate::game::{payoff, GameParams, Intentions, Network};

#[derive(Debug, Clone, PartialEq)]
pub enum WelfareError {
    /// `beta <= comp*lambda_max(G)`: the planner objective is not concave.
    ConcavityViolated { lambda_max: f64 },
    /// The clamped fixed-point fallback did not reach tolerance.
    NonConvergence { iterations: usize },
    /// Network search is exhaustive and only supported for small groups.
    TooManyPlayers { n: usize, max: usize },
}

impl std::fmt::Display for WelfareError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            WelfareError::ConcavityViolated { lambda_max } => write!(
                f,
                "concavity violated: beta <= comp*lambda_max (lambda_max = {lambda_max})"
            ),
            WelfareError::NonConvergence { iterations } => {
                write!(f, "fixed-point iteration did not converge in {iterations} steps")
            }
            WelfareError::TooManyPlayers { n, max } => {
                write!(f, "exhaustive network search supports at most {max} players, got {n}")
            }
        }
    }
}

impl std::error::Error for WelfareError {}

/// Welfare-maximizing effort profile on a fixed network: solves
/// `(2*beta*I - 2*comp*G) x = alpha*1`, falling back to the clamped
/// coordinate-wise maximizer when a component leaves `[0, effort_max]`.
pub fn efficient_effort(network: &Network, params: &GameParams) -> Result<Vec<f64>, WelfareError> {
    let n = network.n();
    let lambda = adjacency_lambda_max(network);
    if params.beta <= params.comp * lambda {
        return Err(WelfareError::ConcavityViolated { lambda_max: lambda });
    }
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        a[i][i] = 2.0 * params.beta;
        for j in 0..n {
            if network.has_edge(i, j) {
                a[i][j] -= 2.0 * params.comp;
            }
        }
    }
    // Gaussian elimination with partial pivoting (system is n <= 6).
    let mut b = vec![params.alpha; n];
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    if x.iter().all(|&v| (0.0..=params.effort_max).contains(&v)) {
        return Ok(x);
    }
    clamped_planner_fixed_point(network, params)
}

const FIXED_POINT_TOL: f64 = 1e-10;
const FIXED_POINT_MAX_ITER: usize = 100_000;

/// Coordinate-wise planner optimum `x_i = (alpha + 2*comp*S_i)/(2*beta)`
/// clamped to the effort interval, iterated to a fixed point.
fn clamped_planner_fixed_point(
    network: &Network,
    params: &GameParams,
) -> Result<Vec<f64>, WelfareError> {
    let n = network.n();
    let mut x = vec![params.alpha / (2.0 * params.beta); n];
    for _ in 0..FIXED_POINT_MAX_ITER {
        let mut delta: f64 = 0.0;
        for i in 0..n {
            let s = network.neighbor_effort_sum(i, &x);
            let next = ((params.alpha + 2.0 * params.comp * s) / (2.0 * params.beta))
                .clamp(0.0, params.effort_max);
            delta = delta.max((next - x[i]).abs());
            x[i] = next;
        }
        if delta < FIXED_POINT_TOL {
            return Ok(x);
        }
    }
    Err(WelfareError::NonConvergence { iterations: FIXED_POINT_MAX_ITER })
}

/// Total welfare of `(efforts, network)` — transfers excluded, each edge
/// charged once.
pub fn total_welfare(network: &Network, efforts: &[f64], params: &GameParams) -> f64 {
    let n = network.n();
    let mut w = 0.0;
    for i in 0..n {
        let x = efforts[i];
        let s = network.neighbor_effort_sum(i, efforts);
        w += params.alpha * x - params.beta * x * x + params.comp * x * s;
    }
    w - params.link_cost * network.edge_count() as f64
}

/// Welfare evaluation with a per-player split.
#[derive(Debug, Clone)]
pub struct WelfareReport {
    pub efforts: Vec<f64>,
    /// Individual payoffs under the reporting initiation convention, with
    /// transfers excluded. Sums to `total`.
    pub per_player: Vec<f64>,
    /// Sum of per-player payoffs; each edge's cost counted once.
    pub total: f64,
    /// `total` plus `link_benefit` transfers (one per edge under the
    /// one-initiator convention), i.e. what players would jointly receive.
    pub total_with_transfers: f64,
    /// The initiation assignment used for the per-player split.
    pub initiations: Intentions,
}

/// Evaluate welfare at a given effort profile.
///
/// Per-player payoffs need an initiation convention because only initiators
/// pay the link cost. Each edge is assigned exactly one initiator so that
/// initiation counts are as balanced as possible, ties going to low-degree
/// endpoints: on a star the periphery initiates, on a complete network every
/// player initiates half of its links.
pub fn welfare(network: &Network, efforts: &[f64], params: &GameParams) -> WelfareReport {
    let intentions = balanced_initiations(network);
    let stripped = GameParams { link_benefit: 0.0, ..*params };
    let per_player: Vec<f64> = (0..network.n())
        .map(|i| payoff(i, efforts, &intentions, &stripped))
        .collect();
    let total: f64 = per_player.iter().sum();
    WelfareReport {
        efforts: efforts.to_vec(),
        per_player,
        total,
        total_with_transfers: total + params.link_benefit * network.edge_count() as f64,
        initiations: intentions,
    }
}

/// Deterministic one-initiator-per-edge assignment minimizing, in order:
/// the spread of initiation counts (sum of squares), total initiations by
/// high-degree endpoints, then the orientation encoding itself.
fn balanced_initiations(network: &Network) -> Intentions {
    let n = network.n();
    let edges = network.edges();
    let m = edges.len();
    assert!(m <= 20, "initiation assignment search is exhaustive in the edge count");
    let mut best: Option<((u64, u64, u32), u32)> = None;
    for orientation in 0u32..1 << m {
        let mut counts = vec![0u64; n];
        let mut degree_weight = 0u64;
        for (e, &(i, j)) in edges.iter().enumerate() {
            let initiator = if orientation >> e & 1 == 1 { j } else { i };
            counts[initiator] += 1;
            degree_weight += network.degree(initiator) as u64;
        }
        let spread: u64 = counts.iter().map(|&c| c * c).sum();
        let key = (spread, degree_weight, orientation);
        if best.map_or(true, |(k, _)| key < k) {
            best = Some((key, orientation));
        }
    }
    let orientation = best.map(|(_, o)| o).unwrap_or(0);
    let mut intentions = Intentions::new(n);
    for (e, &(i, j)) in edges.iter().enumerate() {
        if orientation >> e & 1 == 1 {
            intentions.set(j, i, true);
        } else {
            intentions.set(i, j, true);
        }
    }
    intentions
}

/// The welfare-maximizing network together with its efficient efforts.
#[derive(Debug, Clone)]
pub struct WelfareOptimum {
    pub network: Network,
    pub class: NetworkClass,
    pub report: WelfareReport,
}

const SEARCH_MAX_PLAYERS: usize = 6;

/// Exhaustive search for the welfare-maximizing (network, efforts) pair.
/// Welfare ties are broken toward fewer edges, then toward the smallest
/// canonical edge list under relabeling.
pub fn optimize_welfare(params: &GameParams) -> Result<WelfareOptimum, WelfareError> {
    let n = params.n_players;
    if n > SEARCH_MAX_PLAYERS {
        return Err(WelfareError::TooManyPlayers { n, max: SEARCH_MAX_PLAYERS });
    }
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let mut best: Option<(f64, usize, Vec<(usize, usize)>, Network, Vec<f64>)> = None;
    for adjacency in 0u32..1 << pairs.len() {
        let mut network = Network::empty(n);
        for (k, &(i, j)) in pairs.iter().enumerate() {
            if adjacency >> k & 1 == 1 {
                network.set_edge(i, j, true);
            }
        }
        let efforts = efficient_effort(&network, params)?;
        let w = total_welfare(&network, &efforts, params);
        let edge_count = network.edge_count();
        let replace = match &best {
            None => true,
            Some((bw, bm, bkey, _, _)) => {
                w > bw + 1e-9
                    || ((w - bw).abs() <= 1e-9
                        && (edge_count < *bm
                            || (edge_count == *bm && canonical_edge_key(&network) < *bkey)))
            }
        };
        if replace {
            let key = canonical_edge_key(&network);
            best = Some((w, edge_count, key, network, efforts));
        }
    }
    let (_, _, _, network, efforts) = best.expect("at least the empty network is scanned");
    let report = welfare(&network, &efforts, params);
    Ok(WelfareOptimum { class: classify_network(&network), network, report })
}

/// Lexicographically smallest undirected edge list over all relabelings.
fn canonical_edge_key(network: &Network) -> Vec<(usize, usize)> {
    let n = network.n();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best: Option<Vec<(usize, usize)>> = None;
    loop {
        let mut key = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if network.has_edge(i, j) {
                    let (a, b) = (perm[i].min(perm[j]), perm[i].max(perm[j]));
                    key.push((a, b));
                }
            }
        }
        key.sort_unstable();
        if best.as_ref().map_or(true, |b| &key < b) {
            best = Some(key);
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    best.unwrap_or_default()
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::equilibrium_effort;
    use approx::assert_relative_eq;

    fn params() -> GameParams {
        GameParams::default()
    }

    #[test]
    fn efficient_effort_benchmarks() {
        let p = params();
        let x = efficient_effort(&Network::empty(5), &p).unwrap();
        for v in &x {
            assert_relative_eq!(*v, 2.5, epsilon = 1e-12);
        }
        // complete: 10 / (4 - 0.8*4) = 12.5
        let x = efficient_effort(&Network::complete(5), &p).unwrap();
        for v in &x {
            assert_relative_eq!(*v, 12.5, epsilon = 1e-10);
        }
        // star: center 4.5/0.84 = 75/14, periphery 25/7
        let x = efficient_effort(&Network::star(5, 0), &p).unwrap();
        assert_relative_eq!(x[0], 75.0 / 14.0, epsilon = 1e-10);
        for v in &x[1..] {
            assert_relative_eq!(*v, 25.0 / 7.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn concavity_error() {
        let mut p = params();
        p.comp = 0.6; // beta = 2 <= 0.6*4 on the complete network
        assert!(matches!(
            efficient_effort(&Network::complete(5), &p),
            Err(WelfareError::ConcavityViolated { .. })
        ));
    }

    #[test]
    fn complete_network_welfare_split() {
        // All efforts 12.5, two initiations per player:
        // per player 125 - 312.5 + 250 - 7.8 = 54.7, total 273.5.
        let p = params();
        let net = Network::complete(5);
        let rep = welfare(&net, &[12.5; 5], &p);
        for v in &rep.per_player {
            assert_relative_eq!(*v, 54.7, epsilon = 1e-9);
        }
        assert_relative_eq!(rep.total, 273.5, epsilon = 1e-9);
        for i in 0..5 {
            assert_eq!(rep.initiations.initiated(i), 2);
        }
        assert_relative_eq!(
            rep.total,
            total_welfare(&net, &[12.5; 5], &p),
            epsilon = 1e-9
        );
    }

    #[test]
    fn star_welfare_split_periphery_initiates() {
        // Efficient star efforts: center 75/14, periphery 25/7.
        // center = 2625/98 = 26.7857..., periphery = 875/49 - 3.9 = 13.9571...
        let p = params();
        let net = Network::star(5, 0);
        let x = efficient_effort(&net, &p).unwrap();
        let rep = welfare(&net, &x, &p);
        assert_relative_eq!(rep.per_player[0], 2625.0 / 98.0, epsilon = 1e-9);
        for v in &rep.per_player[1..] {
            assert_relative_eq!(*v, 875.0 / 49.0 - 3.9, epsilon = 1e-9);
        }
        assert_eq!(rep.initiations.initiated(0), 0);
        for j in 1..5 {
            assert_eq!(rep.initiations.initiated(j), 1);
        }
        assert_relative_eq!(
            rep.total,
            rep.per_player.iter().sum::<f64>(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn transfers_reported_gross_and_net() {
        let mut p = params();
        p.link_benefit = 6.0;
        let net = Network::star(5, 0);
        let x = efficient_effort(&net, &p).unwrap();
        let rep = welfare(&net, &x, &p);
        // per-player split excludes transfers entirely
        assert_relative_eq!(rep.per_player.iter().sum::<f64>(), rep.total, epsilon = 1e-12);
        assert_relative_eq!(rep.total_with_transfers, rep.total + 6.0 * 4.0, epsilon = 1e-12);
    }

    #[test]
    fn optimum_is_complete_at_defaults() {
        let p = params();
        let opt = optimize_welfare(&p).unwrap();
        assert_eq!(opt.class, NetworkClass::Complete);
        for v in &opt.report.efforts {
            assert_relative_eq!(*v, 12.5, epsilon = 1e-9);
        }
        for v in &opt.report.per_player {
            assert_relative_eq!(*v, 54.7, epsilon = 1e-9);
        }
    }

    #[test]
    fn optimum_without_complementarity_is_empty() {
        let mut p = params();
        p.comp = 0.0;
        let opt = optimize_welfare(&p).unwrap();
        assert_eq!(opt.class, NetworkClass::Empty);
        for v in &opt.report.efforts {
            assert_relative_eq!(*v, 2.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn efficient_dominates_equilibrium_welfare() {
        // On every 5-player network the planner solution yields at least the
        // welfare of the equilibrium efforts.
        let p = params();
        let pairs: Vec<(usize, usize)> =
            (0..5).flat_map(|i| (i + 1..5).map(move |j| (i, j))).collect();
        for adjacency in 0u32..1 << 10 {
            let mut net = Network::empty(5);
            for (k, &(i, j)) in pairs.iter().enumerate() {
                if adjacency >> k & 1 == 1 {
                    net.set_edge(i, j, true);
                }
            }
            let eff = efficient_effort(&net, &p).unwrap();
            let eq = equilibrium_effort(&net, &p).unwrap();
            let w_eff = total_welfare(&net, &eff, &p);
            let w_eq = total_welfare(&net, &eq, &p);
            assert!(w_eff >= w_eq - 1e-9, "adjacency {adjacency}: {w_eff} < {w_eq}");
        }
    }

    #[test]
    fn planner_gradient_vanishes_at_optimum() {
        // Central finite differences of total welfare at the efficient
        // profile vanish on every component.
        let p = params();
        let net = Network::complete(5);
        let x = efficient_effort(&net, &p).unwrap();
        let h = 1e-5;
        for i in 0..5 {
            let mut up = x.clone();
            let mut dn = x.clone();
            up[i] += h;
            dn[i] -= h;
            let g = (total_welfare(&net, &up, &p) - total_welfare(&net, &dn, &p)) / (2.0 * h);
            assert!(g.abs() < 1e-6, "component {i} gradient {g}");
        }
    }
}
