//! Independent reference implementations shared by the integration and
//! acceptance tests. Nothing here calls into the code under test except
//! for plain data accessors.
#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::HashMap;
use std::f64::consts::FRAC_PI_2;
use std::sync::atomic::{AtomicU64, Ordering};

use migtopo_core::problems::Objective;
use migtopo_core::stats::{Preorder, Relation};
use rand::Rng;

/// Adaptive Simpson quadrature.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = simpson(fa, fm, fb, a, b);
    recurse(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Two-sided Student-t tail by quadrature. With `x = sqrt(dof) tan(theta)`
/// the density becomes proportional to `cos(theta)^(dof - 1)` on
/// `(-pi/2, pi/2)`, so no gamma function is needed.
pub fn t_two_sided_quadrature(t: f64, dof: f64) -> f64 {
    let g = move |theta: f64| theta.cos().max(0.0).powf(dof - 1.0);
    let total = 2.0 * adaptive_simpson(&g, 0.0, FRAC_PI_2, 1e-14);
    let cut = (t.abs() / dof.sqrt()).atan();
    let tail = adaptive_simpson(&g, cut, FRAC_PI_2, 1e-14);
    2.0 * tail / total
}

/// Welch t and Satterthwaite dof, written out longhand.
pub fn welch_t_dof(a: &[f64], b: &[f64]) -> (f64, f64) {
    let stats = |xs: &[f64]| {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
        (n, m, v)
    };
    let (na, ma, va) = stats(a);
    let (nb, mb, vb) = stats(b);
    let se2 = va / na + vb / nb;
    let t = (ma - mb) / se2.sqrt();
    let dof = se2 * se2 / ((va / na).powi(2) / (na - 1.0) + (vb / nb).powi(2) / (nb - 1.0));
    (t, dof)
}

#[derive(Debug, PartialEq)]
pub struct PairCounts {
    pub c: u64,
    pub d: u64,
    pub n0: u64,
    pub n1: u64,
    pub n2: u64,
    pub tau_b: f64,
}

/// Classifies every ordered pair of labels, then halves the counts.
pub fn brute_force_kendall(x: &Preorder, y: &Preorder) -> PairCounts {
    let pos_y: HashMap<&str, usize> = y
        .elements()
        .iter()
        .enumerate()
        .map(|(i, e)| (e.as_str(), i))
        .collect();
    let sign = |r: Relation| match r {
        Relation::Better => 1i32,
        Relation::Worse => -1,
        Relation::Incomparable => 0,
    };
    let (mut c, mut d, mut t1, mut t2, mut total) = (0u64, 0u64, 0u64, 0u64, 0u64);
    let labels = x.elements();
    for (i, a) in labels.iter().enumerate() {
        for (j, b) in labels.iter().enumerate() {
            if i == j {
                continue;
            }
            total += 1;
            let sx = sign(x.relation(i, j));
            let sy = sign(y.relation(pos_y[a.as_str()], pos_y[b.as_str()]));
            if sx == 0 {
                t1 += 1;
            }
            if sy == 0 {
                t2 += 1;
            }
            if sx != 0 && sx == sy {
                c += 1;
            }
            if sx != 0 && sy != 0 && sx != sy {
                d += 1;
            }
        }
    }
    let (c, d, n0, n1, n2) = (c / 2, d / 2, total / 2, t1 / 2, t2 / 2);
    let tau_b = (c as f64 - d as f64) / (((n0 - n1) as f64) * ((n0 - n2) as f64)).sqrt();
    PairCounts { c, d, n0, n1, n2, tau_b }
}

/// Random strict partial order: a random DAG on a shuffled order, closed
/// transitively. Labels are shuffled too.
pub fn random_preorder<R: Rng>(rng: &mut R, n: usize) -> Preorder {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, rng.gen_range(0..=i));
    }
    let density: f64 = rng.gen();
    let mut reach = vec![vec![false; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            reach[i][j] = rng.gen::<f64>() < density;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if reach[i][k] && reach[k][j] {
                    reach[i][j] = true;
                }
            }
        }
    }
    let labels: Vec<String> = perm.iter().map(|p| format!("e{p}")).collect();
    let mut p = Preorder::new(labels);
    for i in 0..n {
        for j in 0..n {
            if reach[i][j] {
                p.set_better(i, j);
            }
        }
    }
    p
}

/// Shuffles element order without changing the relation.
pub fn shuffled<R: Rng>(rng: &mut R, p: &Preorder) -> Preorder {
    let n = p.len();
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, rng.gen_range(0..=i));
    }
    let mut q = Preorder::new(perm.iter().map(|&i| p.elements()[i].clone()).collect());
    for a in 0..n {
        for b in 0..n {
            if p.is_better(perm[a], perm[b]) {
                q.set_better(a, b);
            }
        }
    }
    q
}

/// Wraps an objective and counts calls.
pub struct Counting<'a, O: Objective> {
    pub inner: &'a O,
    pub calls: AtomicU64,
}

impl<'a, O: Objective> Counting<'a, O> {
    pub fn new(inner: &'a O) -> Self {
        Counting {
            inner,
            calls: AtomicU64::new(0),
        }
    }

    pub fn count(&self) -> u64 {
        self.calls.load(Ordering::SeqCst)
    }
}

impl<O: Objective> Objective for Counting<'_, O> {
    fn dims(&self) -> usize {
        self.inner.dims()
    }
    fn lower(&self) -> &[f64] {
        self.inner.lower()
    }
    fn upper(&self) -> &[f64] {
        self.inner.upper()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.inner.value(x)
    }
}

/// Synthetic repetitions x periods matrices for `k` labelled setups.
pub fn synthetic_traces<R: Rng>(rng: &mut R, k: usize, reps: usize, periods: usize) -> Vec<(String, Vec<Vec<f64>>)> {
    (0..k)
        .map(|e| {
            let start: f64 = rng.gen_range(50.0..100.0);
            let end: f64 = rng.gen_range(0.0..10.0);
            let noise: f64 = rng.gen_range(0.1..5.0);
            let rows = (0..reps)
                .map(|_| {
                    (0..periods)
                        .map(|p| {
                            let frac = p as f64 / (periods.max(2) - 1) as f64;
                            let mean = start + (end - start) * frac.sqrt();
                            mean + noise * (rng.gen::<f64>() - 0.5)
                        })
                        .collect()
                })
                .collect();
            (format!("t{e}"), rows)
        })
        .collect()
}

/// Closed-form shape of a deterministic kind: edges, diameter, the set of
/// out-degrees and the clustering coefficient where one is tabulated.
#[derive(Debug, PartialEq)]
pub struct Shape {
    pub edges: usize,
    pub diameter: usize,
    pub degrees: Vec<usize>,
    pub clustering: Option<f64>,
}

/// Returns `None` when `n` is not admissible for the kind.
pub fn closed_form(kind: migtopo_core::TopologyKind, n: usize) -> Option<Shape> {
    use migtopo_core::TopologyKind as K;
    let log2 = n.trailing_zeros() as usize;
    let root = (n as f64).sqrt().round() as usize;
    let shape = |edges, diameter, degrees: &[usize], clustering| Shape {
        edges,
        diameter,
        degrees: degrees.to_vec(),
        clustering,
    };
    Some(match kind {
        K::Chain => shape(n - 1, n - 1, &[0, 1], Some(0.0)),
        K::OneWayRing if n >= 3 => shape(n, n - 1, &[1], Some(0.0)),
        K::Ring if n >= 3 => shape(n, n / 2, &[2], Some(0.0)),
        K::RingPlus12 if n >= 5 => shape(2 * n, (n / 2).div_ceil(2), &[4], (n >= 7).then_some(0.5)),
        K::RingPlus123 if n >= 7 => shape(3 * n, (n / 2).div_ceil(3), &[6], (n >= 10).then_some(0.6)),
        K::Cartwheel if n >= 4 && n.is_multiple_of(2) => shape(3 * n / 2, n.div_ceil(4), &[3], Some(0.0)),
        K::Torus if n >= 6 && n.is_multiple_of(2) => shape(3 * n / 2, n / 4 + 1, &[3], Some(0.0)),
        K::Lattice if root * root == n && root >= 3 => {
            shape(2 * (n - root), 2 * (root - 1), &[2, 3, 4], Some(0.0))
        }
        K::Hypercube if n >= 2 && n.is_power_of_two() => shape(n * log2 / 2, log2, &[log2], Some(0.0)),
        K::Broadcast if n >= 3 => shape(n - 1, 2, &[1, n - 1], Some(0.0)),
        K::FullyConnected if n >= 2 => shape(n * (n - 1) / 2, 1, &[n - 1], Some(1.0)),
        _ => return None,
    })
}

/// All-pairs shortest directed paths by Floyd-Warshall; `usize::MAX` marks
/// unreachable pairs.
pub fn floyd(t: &migtopo_core::Topology) -> Vec<Vec<usize>> {
    let n = t.n_nodes();
    let inf = usize::MAX;
    let mut d = vec![vec![inf; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0;
    }
    for (u, v) in t.arcs() {
        d[u][v] = 1;
    }
    for k in 0..n {
        for i in 0..n {
            if d[i][k] == inf {
                continue;
            }
            for j in 0..n {
                if d[k][j] != inf && d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

/// Average local clustering on the undirected underlying graph, by
/// explicit triangle enumeration.
pub fn clustering_oracle(t: &migtopo_core::Topology) -> f64 {
    let n = t.n_nodes();
    let mut adj = vec![vec![false; n]; n];
    for (u, v) in t.arcs() {
        adj[u][v] = true;
        adj[v][u] = true;
    }
    let mut total = 0.0;
    for i in 0..n {
        let nb: Vec<usize> = (0..n).filter(|&j| adj[i][j]).collect();
        let k = nb.len();
        if k < 2 {
            continue;
        }
        let mut links = 0;
        for a in 0..k {
            for b in a + 1..k {
                if adj[nb[a]][nb[b]] {
                    links += 1;
                }
            }
        }
        total += 2.0 * links as f64 / (k * (k - 1)) as f64;
    }
    total / n as f64
}
