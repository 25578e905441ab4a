//! Effort best responses, Nash certification, and brute-force enumeration of
//! equilibrium link/effort profiles on small groups.
//!
//! With payoff `pi_i = alpha*x_i - beta*x_i^2 + comp*x_i*sum_{k in N_i} x_k
//! - costs`, the effort best response on a fixed network is
//! `x_i = (alpha + comp*sum_k x_k) / (2*beta)` clamped to `[0, effort_max]`.
//! Interior equilibrium efforts therefore solve the linear system
//! `(2*beta*I - comp*G) x = alpha*1`, which is well posed whenever
//! `2*beta > comp*lambda_max(G)`.

use crate::game::{
    payoff, realize_network, GameParams, Intentions, Network,
};

/// Errors from the equilibrium solvers.
#[derive(Debug, Clone, PartialEq)]
pub enum EquilibriumError {
    /// `2*beta <= comp*lambda_max(G)`: the interior system is not positive
    /// definite and best responses need not contract.
    SpectralConditionViolated { lambda_max: f64 },
    /// The clamped fixed-point fallback did not reach tolerance.
    NonConvergence { iterations: usize },
    /// Enumeration is exhaustive and only supported for small groups.
    TooManyPlayers { n: usize, max: usize },
}

impl std::fmt::Display for EquilibriumError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EquilibriumError::SpectralConditionViolated { lambda_max } => write!(
                f,
                "spectral condition violated: 2*beta <= comp*lambda_max (lambda_max = {lambda_max})"
            ),
            EquilibriumError::NonConvergence { iterations } => {
                write!(f, "fixed-point iteration did not converge in {iterations} steps")
            }
            EquilibriumError::TooManyPlayers { n, max } => {
                write!(f, "exhaustive enumeration supports at most {max} players, got {n}")
            }
        }
    }
}

impl std::error::Error for EquilibriumError {}

/// Best-response effort of player `i` against fixed opponent efforts on a
/// fixed network: `clamp((alpha + comp*S_i) / (2*beta), 0, effort_max)`.
pub fn best_response_effort(
    i: usize,
    network: &Network,
    efforts: &[f64],
    params: &GameParams,
) -> f64 {
    let s = network.neighbor_effort_sum(i, efforts);
    ((params.alpha + params.comp * s) / (2.0 * params.beta)).clamp(0.0, params.effort_max)
}

/// Largest adjacency eigenvalue via power iteration on the shifted matrix
/// `G + n*I` (symmetric, nonnegative spectrum after the shift, so the
/// iteration converges from the all-ones start vector).
pub fn adjacency_lambda_max(network: &Network) -> f64 {
    let n = network.n();
    let shift = n as f64;
    let mut v = vec![1.0; n];
    let mut lambda = shift;
    for _ in 0..10_000 {
        let mut w = vec![0.0; n];
        for i in 0..n {
            let mut acc = shift * v[i];
            for j in 0..n {
                if network.has_edge(i, j) {
                    acc += v[j];
                }
            }
            w[i] = acc;
        }
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in &mut w {
            *x /= norm;
        }
        // Rayleigh quotient of the shifted matrix
        let mut rq = 0.0;
        for i in 0..n {
            let mut acc = shift * w[i];
            for j in 0..n {
                if network.has_edge(i, j) {
                    acc += w[j];
                }
            }
            rq += w[i] * acc;
        }
        if (rq - lambda).abs() < 1e-13 {
            return rq - shift;
        }
        lambda = rq;
        v = w;
    }
    lambda - shift
}

/// Dense linear solve by Gaussian elimination with partial pivoting. The
/// systems here are tiny (n <= 6), so no factorization library is warranted.
fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))?;
        if a[pivot][col].abs() < 1e-14 {
            return None;
        }
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
    Some(x)
}

const FIXED_POINT_TOL: f64 = 1e-10;
const FIXED_POINT_MAX_ITER: usize = 100_000;

/// Clamped Gauss-Seidel iteration of the best-response map. Under the
/// spectral condition the map is a contraction and clamping is
/// non-expansive, so this converges geometrically.
fn clamped_fixed_point(
    network: &Network,
    params: &GameParams,
) -> Result<Vec<f64>, EquilibriumError> {
    let n = network.n();
    let mut x = vec![params.alpha / (2.0 * params.beta); n];
    for _ in 0..FIXED_POINT_MAX_ITER {
        let mut delta: f64 = 0.0;
        for i in 0..n {
            let next = best_response_effort(i, network, &x, params);
            delta = delta.max((next - x[i]).abs());
            x[i] = next;
        }
        if delta < FIXED_POINT_TOL {
            return Ok(x);
        }
    }
    Err(EquilibriumError::NonConvergence { iterations: FIXED_POINT_MAX_ITER })
}

/// Equilibrium effort profile on a fixed network.
///
/// Solves `(2*beta*I - comp*G) x = alpha*1` directly; if any component of the
/// interior solution leaves `[0, effort_max]`, falls back to the clamped
/// fixed-point iteration. Errors when the spectral condition fails.
pub fn equilibrium_effort(
    network: &Network,
    params: &GameParams,
) -> Result<Vec<f64>, EquilibriumError> {
    let n = network.n();
    let lambda = adjacency_lambda_max(network);
    if 2.0 * params.beta <= params.comp * lambda {
        return Err(EquilibriumError::SpectralConditionViolated { lambda_max: lambda });
    }
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        a[i][i] = 2.0 * params.beta;
        for j in 0..n {
            if network.has_edge(i, j) {
                a[i][j] -= params.comp;
            }
        }
    }
    let interior = solve_linear(a, vec![params.alpha; n]);
    match interior {
        Some(x) if x.iter().all(|&v| (0.0..=params.effort_max).contains(&v)) => Ok(x),
        _ => clamped_fixed_point(network, params),
    }
}

// ---------------------------------------------------------------------------
// Nash certification
// ---------------------------------------------------------------------------

/// Check whether `(intentions, efforts)` is a Nash equilibrium of the
/// simultaneous link-and-effort game.
///
/// For every player this scans all `2^(n-1)` own intention rows, re-optimizes
/// the player's effort against the resulting realized network (opponents
/// fixed), and records the best payoff gain. Returns the certification flag
/// (`max gain <= eps`) together with the maximal gain found. Pure effort
/// deviations are covered by the unchanged row; pure link deviations by the
/// re-optimized effort being at least as good as the current one.
pub fn is_nash(
    intentions: &Intentions,
    efforts: &[f64],
    params: &GameParams,
    eps: f64,
) -> (bool, f64) {
    let n = intentions.n();
    let mut max_gain = f64::NEG_INFINITY;
    for i in 0..n {
        let current = payoff(i, efforts, intentions, params);
        let opponents: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        // Incoming initiations toward i are fixed by the opponents.
        let incoming: Vec<bool> = opponents.iter().map(|&j| intentions.get(j, i)).collect();
        let mut best = f64::NEG_INFINITY;
        for row in 0u32..1 << (n - 1) {
            let mut s = 0.0;
            let mut initiated = 0usize;
            for (b, &j) in opponents.iter().enumerate() {
                let initiates = row >> b & 1 == 1;
                if initiates {
                    initiated += 1;
                }
                if initiates || incoming[b] {
                    s += efforts[j];
                }
            }
            let x = ((params.alpha + params.comp * s) / (2.0 * params.beta))
                .clamp(0.0, params.effort_max);
            let pi = params.alpha * x - params.beta * x * x + params.comp * x * s
                - params.link_cost * initiated as f64
                + params.link_benefit * intentions.received(i) as f64;
            if pi > best {
                best = pi;
            }
        }
        let gain = best - current;
        if gain > max_gain {
            max_gain = gain;
        }
        if gain > eps {
            return (false, gain);
        }
    }
    (true, max_gain)
}

// ---------------------------------------------------------------------------
// Network classification
// ---------------------------------------------------------------------------

/// Architecture classes used to label benchmark and simulated networks.
/// `Empty`, `Star` and `Complete` take precedence over the core-periphery
/// label that also covers them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NetworkClass {
    Empty,
    Star,
    Complete,
    /// A `k`-player core adjacent to everyone, with the remaining players
    /// linked only toward the core (smallest such `k` is reported).
    CorePeriphery(usize),
    Other,
}

impl std::fmt::Display for NetworkClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NetworkClass::Empty => write!(f, "empty"),
            NetworkClass::Star => write!(f, "star"),
            NetworkClass::Complete => write!(f, "complete"),
            NetworkClass::CorePeriphery(k) => write!(f, "core_periphery({k})"),
            NetworkClass::Other => write!(f, "other"),
        }
    }
}

pub fn classify_network(network: &Network) -> NetworkClass {
    let n = network.n();
    let m = network.edge_count();
    if m == 0 {
        return NetworkClass::Empty;
    }
    if m == n * (n - 1) / 2 {
        return NetworkClass::Complete;
    }
    let mut degrees: Vec<usize> = (0..n).map(|i| network.degree(i)).collect();
    degrees.sort_unstable();
    let star = degrees[n - 1] == n - 1 && degrees[..n - 1].iter().all(|&d| d == 1);
    if star {
        return NetworkClass::Star;
    }
    // Core-periphery with the smallest core: every core player adjacent to
    // all others, no edges between peripheral players.
    for k in 1..n {
        for core in subsets_of_size(n, k) {
            let core_ok = (0..n)
                .filter(|i| core & (1 << i) != 0)
                .all(|i| network.degree(i) == n - 1);
            if !core_ok {
                continue;
            }
            let periphery_ok = (0..n).all(|p| {
                core & (1 << p) != 0
                    || (0..n).all(|q| q == p || core & (1 << q) != 0 || !network.has_edge(p, q))
            });
            if periphery_ok {
                return NetworkClass::CorePeriphery(k);
            }
        }
    }
    NetworkClass::Other
}

fn subsets_of_size(n: usize, k: usize) -> Vec<u32> {
    let mut out = Vec::new();
    for mask in 0u32..1 << n {
        if mask.count_ones() as usize == k {
            out.push(mask);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Exhaustive enumeration
// ---------------------------------------------------------------------------

/// A certified equilibrium profile.
#[derive(Debug, Clone)]
pub struct EquilibriumCertificate {
    pub intentions: Intentions,
    pub efforts: Vec<f64>,
    pub class: NetworkClass,
    /// Largest deviation gain found by the certification scan (<= eps).
    pub max_gain: f64,
}

/// Result of the exhaustive scan.
#[derive(Debug, Clone)]
pub struct Enumeration {
    /// One certificate per (class, initiation pattern) up to relabeling,
    /// sorted by class and canonical form.
    pub certificates: Vec<EquilibriumCertificate>,
    /// Number of one-initiator-per-edge profiles scanned.
    pub profiles_scanned: usize,
    /// Number of scanned profiles that certified as equilibria (before
    /// deduplication).
    pub profiles_certified: usize,
}

impl Enumeration {
    /// Distinct network classes among the certificates, sorted.
    pub fn classes(&self) -> Vec<NetworkClass> {
        let mut cs: Vec<NetworkClass> = self.certificates.iter().map(|c| c.class).collect();
        cs.sort();
        cs.dedup();
        cs
    }
}

const ENUMERATION_MAX_PLAYERS: usize = 6;

/// Brute-force scan over every undirected network on `n` players and every
/// one-initiator-per-edge assignment, certifying each candidate with
/// [`is_nash`] at the supplied tolerance.
///
/// Profiles where both endpoints initiate the same link are skipped: dropping
/// the redundant initiation saves `link_cost` outright, so they are never
/// equilibria under a positive link cost. Certified profiles are deduplicated
/// up to player relabeling of the directed intention matrix.
pub fn enumerate_equilibria(
    params: &GameParams,
    eps: f64,
) -> Result<Enumeration, EquilibriumError> {
    let n = params.n_players;
    if n > ENUMERATION_MAX_PLAYERS {
        return Err(EquilibriumError::TooManyPlayers { n, max: ENUMERATION_MAX_PLAYERS });
    }
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let n_pairs = pairs.len();

    let mut scanned = 0usize;
    let mut certified = 0usize;
    let mut best_by_canon: std::collections::HashMap<Vec<(usize, usize)>, EquilibriumCertificate> =
        std::collections::HashMap::new();
    let perms = permutations(n);

    for adjacency in 0u32..1 << n_pairs {
        let mut network = Network::empty(n);
        let mut edges = Vec::new();
        for (k, &(i, j)) in pairs.iter().enumerate() {
            if adjacency >> k & 1 == 1 {
                network.set_edge(i, j, true);
                edges.push((i, j));
            }
        }
        let efforts = equilibrium_effort(&network, params)?;
        let class = classify_network(&network);
        for assignment in 0u32..1 << edges.len() {
            scanned += 1;
            let mut intentions = Intentions::new(n);
            for (e, &(i, j)) in edges.iter().enumerate() {
                if assignment >> e & 1 == 1 {
                    intentions.set(j, i, true);
                } else {
                    intentions.set(i, j, true);
                }
            }
            let (ok, max_gain) = is_nash(&intentions, &efforts, params, eps);
            if !ok {
                continue;
            }
            certified += 1;
            let canon = canonical_intention_key(&intentions, &perms);
            best_by_canon.entry(canon).or_insert_with(|| EquilibriumCertificate {
                intentions: intentions.clone(),
                efforts: efforts.clone(),
                class,
                max_gain,
            });
        }
    }

    let mut items: Vec<(Vec<(usize, usize)>, EquilibriumCertificate)> =
        best_by_canon.into_iter().collect();
    items.sort_by(|a, b| (a.1.class, &a.0).cmp(&(b.1.class, &b.0)));
    Ok(Enumeration {
        certificates: items.into_iter().map(|(_, c)| c).collect(),
        profiles_scanned: scanned,
        profiles_certified: certified,
    })
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    heap_permute(n, &mut cur, &mut out);
    out
}

fn heap_permute(k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if k <= 1 {
        out.push(cur.clone());
        return;
    }
    for i in 0..k {
        heap_permute(k - 1, cur, out);
        if k % 2 == 0 {
            cur.swap(i, k - 1);
        } else {
            cur.swap(0, k - 1);
        }
    }
}

/// Lexicographically smallest directed edge list over all relabelings.
fn canonical_intention_key(
    intentions: &Intentions,
    perms: &[Vec<usize>],
) -> Vec<(usize, usize)> {
    let n = intentions.n();
    let mut best: Option<Vec<(usize, usize)>> = None;
    for perm in perms {
        let mut key = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if intentions.get(i, j) {
                    key.push((perm[i], perm[j]));
                }
            }
        }
        key.sort_unstable();
        if best.as_ref().map_or(true, |b| &key < b) {
            best = Some(key);
        }
    }
    best.unwrap_or_default()
}
