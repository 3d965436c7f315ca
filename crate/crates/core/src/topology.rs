//! Migration topologies and their graph metrics.
//!
//! A [`Topology`] is a directed graph over island ids `0..n`. Every kind
//! except [`TopologyKind::Chain`] and [`TopologyKind::OneWayRing`] is
//! symmetric: each link is stored as two opposite arcs.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seed;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TopologyError {
    #[error("{kind} topology cannot be built with {n} nodes: requires {requirement}")]
    InvalidNodeCount {
        kind: TopologyKind,
        n: usize,
        requirement: &'static str,
    },
    #[error("Barabasi-Albert topology requires a seed")]
    MissingSeed,
    #[error("Barabasi-Albert parameters must satisfy m0 >= m >= 1 (got m0={m0}, m={m})")]
    InvalidBaParameters { m0: usize, m: usize },
    #[error("unknown topology kind '{0}'")]
    UnknownKind(String),
    #[error("malformed DOT input: {0}")]
    Dot(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TopologyKind {
    Chain,
    OneWayRing,
    Ring,
    RingPlus12,
    RingPlus123,
    Cartwheel,
    Torus,
    Lattice,
    Hypercube,
    Broadcast,
    FullyConnected,
    BarabasiAlbert { m0: usize, m: usize },
    /// No migration links at all; used as the "independent restarts" baseline.
    Isolated,
}

impl TopologyKind {
    pub const DEFAULT_BA: TopologyKind = TopologyKind::BarabasiAlbert { m0: 3, m: 2 };

    /// The eleven deterministic kinds studied alongside BA(3,2).
    pub const DETERMINISTIC: [TopologyKind; 11] = [
        TopologyKind::Chain,
        TopologyKind::OneWayRing,
        TopologyKind::Ring,
        TopologyKind::RingPlus12,
        TopologyKind::RingPlus123,
        TopologyKind::Cartwheel,
        TopologyKind::Torus,
        TopologyKind::Lattice,
        TopologyKind::Hypercube,
        TopologyKind::Broadcast,
        TopologyKind::FullyConnected,
    ];

    /// Chain and One-way Ring carry arcs in one direction only.
    pub fn is_directed(self) -> bool {
        matches!(self, TopologyKind::Chain | TopologyKind::OneWayRing)
    }

    /// Checks the node-count constraint of the kind.
    pub fn check_nodes(self, n: usize) -> Result<(), TopologyError> {
        let (ok, requirement) = match self {
            TopologyKind::Chain
            | TopologyKind::Broadcast
            | TopologyKind::FullyConnected
            | TopologyKind::Isolated
            | TopologyKind::Lattice => (n >= 1, "n >= 1"),
            TopologyKind::OneWayRing | TopologyKind::Ring => (n >= 3, "n >= 3"),
            TopologyKind::RingPlus12 => (n >= 5, "n >= 5"),
            TopologyKind::RingPlus123 => (n >= 7, "n >= 7"),
            TopologyKind::Cartwheel => (n >= 4 && n.is_multiple_of(2), "n even and n >= 4"),
            TopologyKind::Torus => (n >= 6 && n.is_multiple_of(2), "n even and n >= 6"),
            TopologyKind::Hypercube => (n >= 2 && n.is_power_of_two(), "n a power of two, n >= 2"),
            TopologyKind::BarabasiAlbert { m0, m } => {
                if m == 0 || m0 < m {
                    return Err(TopologyError::InvalidBaParameters { m0, m });
                }
                (n >= m0.max(1), "n >= m0")
            }
        };
        if ok {
            Ok(())
        } else {
            Err(TopologyError::InvalidNodeCount {
                kind: self,
                n,
                requirement,
            })
        }
    }
}

impl fmt::Display for TopologyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TopologyKind::Chain => f.write_str("chain"),
            TopologyKind::OneWayRing => f.write_str("one-way-ring"),
            TopologyKind::Ring => f.write_str("ring"),
            TopologyKind::RingPlus12 => f.write_str("ring+1+2"),
            TopologyKind::RingPlus123 => f.write_str("ring+1+2+3"),
            TopologyKind::Cartwheel => f.write_str("cartwheel"),
            TopologyKind::Torus => f.write_str("torus"),
            TopologyKind::Lattice => f.write_str("lattice"),
            TopologyKind::Hypercube => f.write_str("hypercube"),
            TopologyKind::Broadcast => f.write_str("broadcast"),
            TopologyKind::FullyConnected => f.write_str("fully-connected"),
            TopologyKind::BarabasiAlbert { m0: 3, m: 2 } => f.write_str("ba"),
            TopologyKind::BarabasiAlbert { m0, m } => write!(f, "ba({m0},{m})"),
            TopologyKind::Isolated => f.write_str("isolated"),
        }
    }
}

impl FromStr for TopologyKind {
    type Err = TopologyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        let kind = match norm.as_str() {
            "chain" => TopologyKind::Chain,
            "one-way-ring" | "oneway-ring" | "onewayring" => TopologyKind::OneWayRing,
            "ring" => TopologyKind::Ring,
            "ring+1+2" | "ring12" => TopologyKind::RingPlus12,
            "ring+1+2+3" | "ring123" => TopologyKind::RingPlus123,
            "cartwheel" => TopologyKind::Cartwheel,
            "torus" => TopologyKind::Torus,
            "lattice" => TopologyKind::Lattice,
            "hypercube" => TopologyKind::Hypercube,
            "broadcast" | "star" => TopologyKind::Broadcast,
            "fully-connected" | "fc" | "full" => TopologyKind::FullyConnected,
            "ba" | "barabasi-albert" => TopologyKind::DEFAULT_BA,
            "isolated" | "none" | "empty" => TopologyKind::Isolated,
            other => {
                let params = other
                    .strip_prefix("ba(")
                    .and_then(|rest| rest.strip_suffix(')'))
                    .and_then(|inner| inner.split_once(','))
                    .and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)));
                match params {
                    Some((m0, m)) => TopologyKind::BarabasiAlbert { m0, m },
                    None => return Err(TopologyError::UnknownKind(s.to_string())),
                }
            }
        };
        Ok(kind)
    }
}

impl Serialize for TopologyKind {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TopologyKind {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Directed graph of permitted migration paths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    kind: TopologyKind,
    seed: Option<u64>,
    /// Sorted out-neighbours per node.
    out: Vec<Vec<usize>>,
}

impl Topology {
    /// Builds a topology of `kind` over `n` islands. `seed` is required for
    /// Barabasi-Albert graphs and ignored otherwise.
    pub fn build(kind: TopologyKind, n: usize, seed: Option<u64>) -> Result<Self, TopologyError> {
        kind.check_nodes(n)?;
        let mut links: BTreeSet<(usize, usize)> = BTreeSet::new();
        let mut seed_used = None;
        match kind {
            TopologyKind::Chain => links.extend((1..n).map(|i| (i - 1, i))),
            TopologyKind::OneWayRing => links.extend((0..n).map(|i| (i, (i + 1) % n))),
            TopologyKind::Ring => circulant(n, &[1], &mut links),
            TopologyKind::RingPlus12 => circulant(n, &[1, 2], &mut links),
            TopologyKind::RingPlus123 => circulant(n, &[1, 2, 3], &mut links),
            TopologyKind::Cartwheel => {
                circulant(n, &[1], &mut links);
                let half = n / 2;
                links.extend((0..half).map(|i| (i, i + half)));
            }
            TopologyKind::Torus => {
                // Two rings of n/2 nodes with corresponding nodes joined.
                let k = n / 2;
                for i in 0..k {
                    links.insert((i, (i + 1) % k));
                    links.insert((k + i, k + (i + 1) % k));
                    links.insert((i, k + i));
                }
            }
            TopologyKind::Lattice => {
                // Row-major on a ceil(sqrt n) wide grid; the last row may be partial.
                let side = ceil_sqrt(n);
                for id in 0..n {
                    if (id % side) + 1 < side && id + 1 < n {
                        links.insert((id, id + 1));
                    }
                    if id + side < n {
                        links.insert((id, id + side));
                    }
                }
            }
            TopologyKind::Hypercube => {
                let dim = n.trailing_zeros();
                for id in 0..n {
                    for bit in 0..dim {
                        links.insert((id, id ^ (1 << bit)));
                    }
                }
            }
            TopologyKind::Broadcast => links.extend((1..n).map(|i| (0, i))),
            TopologyKind::FullyConnected => {
                for i in 0..n {
                    links.extend((i + 1..n).map(|j| (i, j)));
                }
            }
            TopologyKind::BarabasiAlbert { m0, m } => {
                let s = seed.ok_or(TopologyError::MissingSeed)?;
                seed_used = Some(s);
                barabasi_albert(n, m0, m, s, &mut links);
            }
            TopologyKind::Isolated => {}
        }

        let mut out = vec![Vec::new(); n];
        for &(u, v) in &links {
            debug_assert_ne!(u, v);
            out[u].push(v);
            if !kind.is_directed() {
                out[v].push(u);
            }
        }
        for adj in &mut out {
            adj.sort_unstable();
            adj.dedup();
        }
        Ok(Topology {
            kind,
            seed: seed_used,
            out,
        })
    }

    /// Builds a topology from an explicit arc list. Arcs are taken as given;
    /// self-loops and duplicates are dropped.
    pub fn from_arcs(
        kind: TopologyKind,
        n: usize,
        seed: Option<u64>,
        arcs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, TopologyError> {
        let mut out = vec![Vec::new(); n];
        for (u, v) in arcs {
            if u >= n || v >= n {
                return Err(TopologyError::Dot(format!("arc {u}->{v} outside 0..{n}")));
            }
            if u != v {
                out[u].push(v);
            }
        }
        for adj in &mut out {
            adj.sort_unstable();
            adj.dedup();
        }
        Ok(Topology { kind, seed, out })
    }

    pub fn kind(&self) -> TopologyKind {
        self.kind
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn n_nodes(&self) -> usize {
        self.out.len()
    }

    pub fn out_neighbors(&self, node: usize) -> &[usize] {
        &self.out[node]
    }

    /// In-neighbours of every node, sorted.
    pub fn in_neighbors(&self) -> Vec<Vec<usize>> {
        let mut inn = vec![Vec::new(); self.n_nodes()];
        for (u, v) in self.arcs() {
            inn[v].push(u);
        }
        inn
    }

    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(u, adj)| adj.iter().map(move |&v| (u, v)))
    }

    pub fn arc_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    pub fn has_arc(&self, u: usize, v: usize) -> bool {
        self.out[u].binary_search(&v).is_ok()
    }

    /// True when every arc has its reverse.
    pub fn is_symmetric(&self) -> bool {
        self.arcs().all(|(u, v)| self.has_arc(v, u))
    }

    /// Undirected links for symmetric graphs, arcs otherwise.
    pub fn edge_count(&self) -> usize {
        if self.is_symmetric() {
            self.arc_count() / 2
        } else {
            self.arc_count()
        }
    }

    /// Shortest directed hop counts from `source`; `None` marks unreachable nodes.
    pub fn distances_from(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n_nodes()];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap_or(0);
            for &v in &self.out[u] {
                if dist[v].is_none() {
                    dist[v] = Some(d + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Whether every node is reachable from every other along the
    /// underlying undirected graph.
    pub fn is_weakly_connected(&self) -> bool {
        let n = self.n_nodes();
        if n == 0 {
            return true;
        }
        let und = self.undirected_adjacency();
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &v in &und[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    fn undirected_adjacency(&self) -> Vec<Vec<usize>> {
        let mut und: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); self.n_nodes()];
        for (u, v) in self.arcs() {
            und[u].insert(v);
            und[v].insert(u);
        }
        und.into_iter().map(|s| s.into_iter().collect()).collect()
    }

    pub fn metrics(&self) -> TopologyMetrics {
        compute_metrics(self)
    }

    /// Graphviz description. Directed kinds use `digraph`/`->`, others
    /// `graph`/`--` with one line per undirected link.
    pub fn to_dot(&self) -> String {
        let symmetric = self.is_symmetric() && !self.kind.is_directed();
        let mut s = String::new();
        s.push_str(if symmetric { "graph" } else { "digraph" });
        s.push_str(" topology {\n");
        s.push_str(&format!("  graph [kind=\"{}\"", self.kind));
        if let Some(seed) = self.seed {
            s.push_str(&format!(", seed=\"{seed}\""));
        }
        s.push_str("];\n");
        for node in 0..self.n_nodes() {
            s.push_str(&format!("  {node};\n"));
        }
        for (u, v) in self.arcs() {
            if symmetric {
                if u < v {
                    s.push_str(&format!("  {u} -- {v};\n"));
                }
            } else {
                s.push_str(&format!("  {u} -> {v};\n"));
            }
        }
        s.push_str("}\n");
        s
    }

    /// Parses the output of [`Topology::to_dot`].
    pub fn from_dot(text: &str) -> Result<Self, TopologyError> {
        let bad = |msg: &str| TopologyError::Dot(msg.to_string());
        let trimmed = text.trim_start();
        let directed = if trimmed.starts_with("digraph") {
            true
        } else if trimmed.starts_with("graph") {
            false
        } else {
            return Err(bad("expected 'graph' or 'digraph' header"));
        };
        let mut kind = None;
        let mut seed = None;
        let mut n = 0usize;
        let mut arcs = Vec::new();
        let body_start = text.find('{').ok_or_else(|| bad("missing '{'"))?;
        let body_end = text.rfind('}').ok_or_else(|| bad("missing '}'"))?;
        for stmt in text[body_start + 1..body_end].split(';') {
            let stmt = stmt.trim();
            if stmt.is_empty() {
                continue;
            }
            if let Some(attrs) = stmt.strip_prefix("graph") {
                let attrs = attrs.trim().trim_start_matches('[').trim_end_matches(']');
                for kv in attrs.split(',') {
                    let Some((key, value)) = kv.split_once('=') else {
                        continue;
                    };
                    let value = value.trim().trim_matches('"');
                    match key.trim() {
                        "kind" => kind = Some(value.parse()?),
                        "seed" => seed = Some(value.parse().map_err(|_| bad("bad seed"))?),
                        _ => {}
                    }
                }
                continue;
            }
            let sep = if directed { "->" } else { "--" };
            let parse_id = |t: &str| t.trim().parse::<usize>().map_err(|_| bad(t));
            if let Some((a, b)) = stmt.split_once(sep) {
                let (u, v) = (parse_id(a)?, parse_id(b)?);
                n = n.max(u + 1).max(v + 1);
                arcs.push((u, v));
                if !directed {
                    arcs.push((v, u));
                }
            } else {
                n = n.max(parse_id(stmt)? + 1);
            }
        }
        let kind = kind.unwrap_or(if directed {
            TopologyKind::Chain
        } else {
            TopologyKind::Isolated
        });
        Topology::from_arcs(kind, n, seed, arcs)
    }
}

fn circulant(n: usize, offsets: &[usize], links: &mut BTreeSet<(usize, usize)>) {
    for i in 0..n {
        for &k in offsets {
            let j = (i + k) % n;
            links.insert((i.min(j), i.max(j)));
        }
    }
}

fn ceil_sqrt(n: usize) -> usize {
    let mut k = (n as f64).sqrt() as usize;
    while k * k < n {
        k += 1;
    }
    while k > 1 && (k - 1) * (k - 1) >= n {
        k -= 1;
    }
    k.max(1)
}

/// Barabasi-Albert growth: a complete seed cluster of `m0` nodes, then each
/// new node links to `m` distinct existing nodes drawn with probability
/// proportional to their current degree.
fn barabasi_albert(n: usize, m0: usize, m: usize, seed: u64, links: &mut BTreeSet<(usize, usize)>) {
    let mut rng = seed::stream(seed);
    let mut degree = vec![0u64; n];
    for i in 0..m0 {
        for j in i + 1..m0 {
            links.insert((i, j));
            degree[i] += 1;
            degree[j] += 1;
        }
    }
    let mut chosen: Vec<usize> = Vec::with_capacity(m);
    for v in m0..n {
        chosen.clear();
        while chosen.len() < m {
            let total: u64 = (0..v)
                .filter(|u| !chosen.contains(u))
                .map(|u| degree[u])
                .sum();
            let pick = if total == 0 {
                // Degenerate start (m0 = 1): fall back to a uniform choice.
                let free: Vec<usize> = (0..v).filter(|u| !chosen.contains(u)).collect();
                free[rng.gen_range(0..free.len())]
            } else {
                let mut ticket = rng.gen_range(0..total);
                let mut pick = 0;
                for u in (0..v).filter(|u| !chosen.contains(u)) {
                    if ticket < degree[u] {
                        pick = u;
                        break;
                    }
                    ticket -= degree[u];
                }
                pick
            };
            chosen.push(pick);
        }
        for &u in &chosen {
            links.insert((u, v));
            degree[u] += 1;
            degree[v] += 1;
        }
    }
}

/// Graph properties used to characterise and rank topologies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyMetrics {
    pub kind: TopologyKind,
    pub n: usize,
    /// Undirected link count for symmetric graphs, arc count otherwise.
    #[serde(rename = "edges")]
    pub edge_count: usize,
    pub diameter: usize,
    #[serde(rename = "avg_path")]
    pub avg_shortest_path: f64,
    /// Out-degree statistics.
    pub min_degree: usize,
    pub avg_degree: f64,
    pub max_degree: usize,
    /// Average local clustering of the underlying undirected graph.
    #[serde(rename = "clustering")]
    pub clustering_coefficient: f64,
}

impl TopologyMetrics {
    /// Arc density `arcs / (n (n - 1))`.
    pub fn density(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.avg_degree / (self.n - 1) as f64
        }
    }
}

/// Computes diameter and mean path length over reachable ordered pairs,
/// out-degree statistics and the average local clustering coefficient.
pub fn compute_metrics(t: &Topology) -> TopologyMetrics {
    let n = t.n_nodes();
    let mut diameter = 0;
    let mut path_sum = 0u64;
    let mut path_pairs = 0u64;
    for s in 0..n {
        for d in t.distances_from(s).into_iter().flatten().filter(|&d| d > 0) {
            diameter = diameter.max(d);
            path_sum += d as u64;
            path_pairs += 1;
        }
    }
    let avg_shortest_path = if path_pairs == 0 {
        0.0
    } else {
        path_sum as f64 / path_pairs as f64
    };

    let degrees: Vec<usize> = (0..n).map(|u| t.out_neighbors(u).len()).collect();
    let min_degree = degrees.iter().copied().min().unwrap_or(0);
    let max_degree = degrees.iter().copied().max().unwrap_or(0);
    let avg_degree = if n == 0 {
        0.0
    } else {
        t.arc_count() as f64 / n as f64
    };

    let und = t.undirected_adjacency();
    let mut local_sum = 0.0;
    for adj in &und {
        let k = adj.len();
        if k < 2 {
            continue;
        }
        let mut closed = 0usize;
        for (i, &a) in adj.iter().enumerate() {
            for &b in &adj[i + 1..] {
                if und[a].binary_search(&b).is_ok() {
                    closed += 1;
                }
            }
        }
        local_sum += closed as f64 / (k * (k - 1) / 2) as f64;
    }
    let clustering_coefficient = if n == 0 { 0.0 } else { local_sum / n as f64 };

    TopologyMetrics {
        kind: t.kind(),
        n,
        edge_count: t.edge_count(),
        diameter,
        avg_shortest_path,
        min_degree,
        avg_degree,
        max_degree,
        clustering_coefficient,
    }
}
