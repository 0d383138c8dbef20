//! Generators and brute-force oracles shared by the integration tests.
//!
//! The oracles only read the raw graph (nodes, edges, terminals, class
//! membership) and never call the library's own connectivity, spanning-tree
//! or enumeration code.
#![allow(dead_code)]

use netrel::lifetimes::LifetimeDistribution;
use netrel::{FailureMode, Network, StateVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::path::PathBuf;

pub type Dists = Vec<LifetimeDistribution<f64>>;

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

/// Random connected simple graph: a random spanning tree plus extra edges.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Vec<(usize, usize)> {
    let m = m.clamp(n - 1, n * (n - 1) / 2);
    let mut edges: Vec<(usize, usize)> = (1..n).map(|v| (rng.random_range(0..v), v)).collect();
    while edges.len() < m {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        let e = (u.min(v), u.max(v));
        if u != v && !edges.contains(&e) {
            edges.push(e);
        }
    }
    edges
}

fn random_distribution(rng: &mut ChaCha8Rng) -> LifetimeDistribution<f64> {
    match rng.random_range(0..4) {
        0 => LifetimeDistribution::exponential(rng.random_range(0.5..2.0)),
        1 => LifetimeDistribution::weibull(rng.random_range(0.5..2.0), rng.random_range(0.8..3.0)),
        2 => {
            LifetimeDistribution::lognormal(rng.random_range(-0.5..0.5), rng.random_range(0.3..1.0))
        }
        _ => LifetimeDistribution::gamma(rng.random_range(0.5..1.5), rng.random_range(1.0..3.0)),
    }
    .unwrap()
}

/// Splits `items` into `s` non-empty random classes.
fn random_classes(rng: &mut ChaCha8Rng, items: &[usize], s: usize) -> Vec<Vec<usize>> {
    let mut classes = vec![Vec::new(); s];
    for (k, &e) in items.iter().enumerate() {
        let c = if k < s { k } else { rng.random_range(0..s) };
        classes[c].push(e);
    }
    classes
}

/// Edge-failure network with 6 to 10 nodes, at most 20 edges and 1 to 3 classes.
pub fn random_edge_network(seed: u64) -> (Network, Dists) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(6..=10usize);
    let m = rng.random_range(n..=20usize.min(n * (n - 1) / 2));
    let edges = random_graph(&mut rng, n, m);
    let s = rng.random_range(1..=3usize);
    let classes = random_classes(&mut rng, &(0..edges.len()).collect::<Vec<_>>(), s);
    let dists = (0..s).map(|_| random_distribution(&mut rng)).collect();
    let t = rng.random_range(1..n);
    (
        Network::edge_failure(n, &edges, &[0, t], classes).unwrap(),
        dists,
    )
}

/// Node-failure network with 6 to 12 unreliable non-terminal nodes.
pub fn random_node_network(seed: u64) -> (Network, Dists) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(8..=14usize);
    let m = rng.random_range(n..=(2 * n).min(n * (n - 1) / 2));
    let edges = random_graph(&mut rng, n, m);
    let t = rng.random_range(1..n);
    let unreliable: Vec<usize> = (1..n).filter(|&v| v != t).collect();
    let s = rng.random_range(1..=2usize);
    let classes = random_classes(&mut rng, &unreliable, s);
    let dists = (0..s).map(|_| random_distribution(&mut rng)).collect();
    (
        Network::node_failure(n, &edges, &[0, t], classes).unwrap(),
        dists,
    )
}

/// Terminal connectivity by depth-first search over the working elements.
pub fn oracle_works(net: &Network, x: &StateVector) -> bool {
    let n = net.n_nodes();
    let p = net.parts();
    let mut node_ok = vec![true; n];
    let mut edge_ok = vec![true; p.edges.len()];
    let mut k = 0;
    match p.failure_mode {
        FailureMode::EdgeFailure => {
            for ok in edge_ok.iter_mut() {
                *ok = x.get(k);
                k += 1;
            }
        }
        FailureMode::NodeFailure => {
            let classed: Vec<usize> = p.classes.iter().flatten().copied().collect();
            for (v, ok) in node_ok.iter_mut().enumerate() {
                if classed.contains(&v)
                    && !p.terminals.contains(&v)
                    && !p.reliable_nodes.contains(&v)
                {
                    *ok = x.get(k);
                    k += 1;
                }
            }
        }
    }
    assert_eq!(k, x.len());
    let mut seen = vec![false; n];
    let mut stack = vec![p.terminals[0]];
    seen[p.terminals[0]] = true;
    while let Some(u) = stack.pop() {
        for (e, &(a, b)) in p.edges.iter().enumerate() {
            if !edge_ok[e] || !node_ok[a] || !node_ok[b] {
                continue;
            }
            let other = if a == u {
                b
            } else if b == u {
                a
            } else {
                continue;
            };
            if !seen[other] {
                seen[other] = true;
                stack.push(other);
            }
        }
    }
    p.terminals.iter().all(|&t| seen[t])
}

/// Class of each component, from raw class membership in canonical order.
pub fn oracle_component_classes(net: &Network) -> Vec<usize> {
    let p = net.parts();
    let class_of = |element: usize| p.classes.iter().position(|c| c.contains(&element));
    match p.failure_mode {
        FailureMode::EdgeFailure => (0..p.edges.len())
            .map(|e| class_of(e).unwrap_or(0))
            .collect(),
        FailureMode::NodeFailure => (0..net.n_nodes())
            .filter(|v| !p.terminals.contains(v) && !p.reliable_nodes.contains(v))
            .filter_map(class_of)
            .collect(),
    }
}

/// Survival signature by enumerating every state: key -> (working states, states).
pub fn oracle_signature(net: &Network) -> HashMap<Vec<usize>, (u64, u64)> {
    let classes = oracle_component_classes(net);
    let m = classes.len();
    let s = classes
        .iter()
        .max()
        .map_or(1, |c| c + 1)
        .max(net.n_classes());
    let mut out: HashMap<Vec<usize>, (u64, u64)> = HashMap::new();
    for mask in 0..1u64 << m {
        let x = StateVector::from_mask(m, mask);
        let mut key = vec![0; s];
        for (i, &c) in classes.iter().enumerate() {
            if mask >> i & 1 == 1 {
                key[c] += 1;
            }
        }
        let entry = out.entry(key).or_default();
        entry.0 += oracle_works(net, &x) as u64;
        entry.1 += 1;
    }
    out
}

/// Reliability at `t` as the sum of working-state probabilities.
pub fn oracle_reliability(net: &Network, dists: &[LifetimeDistribution<f64>], t: f64) -> f64 {
    let classes = oracle_component_classes(net);
    let p: Vec<f64> = classes
        .iter()
        .map(|&c| 1.0 - dists[c].cdf(t).unwrap())
        .collect();
    let m = classes.len();
    (0..1u64 << m)
        .filter(|&mask| oracle_works(net, &StateVector::from_mask(m, mask)))
        .map(|mask| {
            (0..m)
                .map(|i| if mask >> i & 1 == 1 { p[i] } else { 1.0 - p[i] })
                .product::<f64>()
        })
        .sum()
}

/// Widest-path bottleneck between the terminals: the largest `w` such that
/// edges of weight at least `w` connect them.
pub fn oracle_bottleneck(n: usize, edges: &[(usize, usize)], s: usize, t: usize, w: &[f64]) -> f64 {
    let mut levels: Vec<f64> = w.to_vec();
    levels.sort_by(|a, b| b.total_cmp(a));
    for level in levels {
        let mut seen = vec![false; n];
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(u) = stack.pop() {
            for (e, &(a, b)) in edges.iter().enumerate() {
                if w[e] < level {
                    continue;
                }
                let other = if a == u {
                    b
                } else if b == u {
                    a
                } else {
                    continue;
                };
                if !seen[other] {
                    seen[other] = true;
                    stack.push(other);
                }
            }
        }
        if seen[t] {
            return level;
        }
    }
    f64::NEG_INFINITY
}

/// Masks of every working state.
pub fn oracle_working_states(net: &Network) -> Vec<u64> {
    let m = oracle_component_classes(net).len();
    (0..1u64 << m)
        .filter(|&mask| oracle_works(net, &StateVector::from_mask(m, mask)))
        .collect()
}

/// Reliability curve by summing working-state probabilities at every grid point.
pub fn oracle_curve(net: &Network, dists: &[LifetimeDistribution<f64>], grid: &[f64]) -> Vec<f64> {
    let classes = oracle_component_classes(net);
    let working = oracle_working_states(net);
    grid.iter()
        .map(|&t| {
            let p: Vec<f64> = classes
                .iter()
                .map(|&c| 1.0 - dists[c].cdf(t).unwrap())
                .collect();
            working
                .iter()
                .map(|&mask| {
                    p.iter()
                        .enumerate()
                        .map(|(i, &pi)| if mask >> i & 1 == 1 { pi } else { 1.0 - pi })
                        .product::<f64>()
                })
                .sum()
        })
        .collect()
}
