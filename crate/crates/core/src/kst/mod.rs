//! K-terminal spanning tree engine.
//!
//! With component lifetimes as edge weights, the maximum spanning tree pruned
//! down to the terminals contains a widest terminal-to-terminal path; its
//! shortest-lived edge fails exactly when the terminals disconnect. One tree
//! per lifetime sample therefore labels the whole chain of `M + 1` states
//! obtained by failing components in lifetime order.

mod union_find;

pub use union_find::DisjointSet;

use crate::lifetimes::{node_to_edge, LifetimeSample};
use crate::net_model::{FailureMode, Network, StateVector};
use crate::scalar::{cmp, Scalar};
use crate::{Error, Result};

/// Component indices ordered by ascending lifetime, ties by index.
#[derive(Clone, Debug, PartialEq)]
pub struct SortedSample<T> {
    pub order: Vec<usize>,
    pub sorted_times: Vec<T>,
}

/// Component indices by ascending lifetime, ties by index.
pub fn failure_order<T: Scalar>(times: &[T]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&a, &b| cmp(times[a], times[b]).then(a.cmp(&b)));
    order
}

impl<T: Scalar> SortedSample<T> {
    pub fn new(times: &[T]) -> Self {
        let order = failure_order(times);
        let sorted_times = order.iter().map(|&i| times[i]).collect();
        Self {
            order,
            sorted_times,
        }
    }
}

/// Maximum spanning tree by Kruskal's algorithm; returns edge indices in
/// acceptance order.
///
/// Equal weights are taken in ascending edge index.
pub fn max_spanning_tree<T: Scalar>(net: &Network, edge_weights: &[T]) -> Result<Vec<usize>> {
    if edge_weights.len() != net.n_edges() {
        return Err(Error::LengthMismatch {
            expected: net.n_edges(),
            found: edge_weights.len(),
        });
    }
    let n_v = net.n_nodes();
    let mut by_weight: Vec<usize> = (0..net.n_edges()).collect();
    by_weight.sort_by(|&a, &b| cmp(edge_weights[b], edge_weights[a]).then(a.cmp(&b)));

    let mut sets = DisjointSet::new(n_v);
    let mut tree = Vec::with_capacity(n_v.saturating_sub(1));
    for e in by_weight {
        if tree.len() + 1 >= n_v {
            break;
        }
        let (u, v) = net.edges()[e];
        if sets.union(u, v) {
            tree.push(e);
        }
    }
    if tree.len() + 1 < n_v {
        return Err(Error::Disconnected);
    }
    Ok(tree)
}

/// Strips non-terminal leaves until every leaf is a terminal, leaving the
/// minimal subtree spanning the terminals. Output is sorted by edge index.
pub fn prune_to_terminals(net: &Network, tree: &[usize]) -> Vec<usize> {
    let n_v = net.n_nodes();
    let mut degree = vec![0usize; n_v];
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n_v];
    for &e in tree {
        let (u, v) = net.edges()[e];
        degree[u] += 1;
        degree[v] += 1;
        incident[u].push(e);
        incident[v].push(e);
    }
    let mut is_terminal = vec![false; n_v];
    for &t in net.terminals() {
        is_terminal[t] = true;
    }
    let mut alive = vec![false; net.n_edges()];
    for &e in tree {
        alive[e] = true;
    }
    let mut leaves: Vec<usize> = (0..n_v)
        .filter(|&v| degree[v] == 1 && !is_terminal[v])
        .collect();
    while let Some(v) = leaves.pop() {
        let Some(&e) = incident[v].iter().find(|&&e| alive[e]) else {
            continue;
        };
        alive[e] = false;
        degree[v] -= 1;
        let (a, b) = net.edges()[e];
        let other = if a == v { b } else { a };
        degree[other] -= 1;
        if degree[other] == 1 && !is_terminal[other] {
            leaves.push(other);
        }
    }
    let mut kept: Vec<usize> = tree.iter().copied().filter(|&e| alive[e]).collect();
    kept.sort_unstable();
    kept
}

/// Shortest-lived edge of the terminal-pruned maximum spanning tree.
///
/// `None` when the pruned tree is empty (a single distinct terminal).
pub fn bottleneck_edge<T: Scalar>(net: &Network, edge_weights: &[T]) -> Result<Option<usize>> {
    let tree = max_spanning_tree(net, edge_weights)?;
    let pruned = prune_to_terminals(net, &tree);
    Ok(pruned
        .into_iter()
        .min_by(|&a, &b| cmp(edge_weights[a], edge_weights[b]).then(a.cmp(&b))))
}

/// Network failure time of one sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KLifetime<T> {
    /// Lifetime of the bottleneck component; infinite if the network cannot fail.
    pub time: T,
    /// Bottleneck component, if any.
    pub component: Option<usize>,
    /// 1-based position of the bottleneck in the ascending sort; `M + 1` when
    /// the network cannot fail. Equals the number of working chain states.
    pub rank: usize,
}

/// K-terminal lifetime of `sample`; node failure goes through [`node_to_edge`].
pub fn k_lifetime<T: Scalar>(net: &Network, sample: &LifetimeSample<T>) -> Result<KLifetime<T>> {
    let m = net.m();
    if sample.times.len() != m {
        return Err(Error::LengthMismatch {
            expected: m,
            found: sample.times.len(),
        });
    }
    let component = match net.failure_mode() {
        FailureMode::EdgeFailure => {
            let weights: Vec<T> = (0..net.n_edges())
                .map(|e| match net.element_component(e) {
                    Some(c) => sample.times[c],
                    None => T::infinity(),
                })
                .collect();
            bottleneck_edge(net, &weights)?.and_then(|e| net.element_component(e))
        }
        FailureMode::NodeFailure => {
            let edges = node_to_edge(net, sample)?;
            bottleneck_edge(net, &edges.times)?.and_then(|e| edges.source[e])
        }
    };
    Ok(match component {
        Some(c) => {
            let t = sample.times[c];
            let before = sample
                .times
                .iter()
                .enumerate()
                .filter(|&(i, &ti)| ti < t || (ti == t && i < c))
                .count();
            KLifetime {
                time: t,
                component: Some(c),
                rank: before + 1,
            }
        }
        None => KLifetime {
            time: T::infinity(),
            component: None,
            rank: m + 1,
        },
    })
}

/// The `M + 1` states of one sample with their structure-function values.
///
/// State `i` (0-based) has the `i` shortest-lived components failed and works
/// iff `i < k_rank`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateChain<T> {
    pub sorted: SortedSample<T>,
    pub k_lifetime: T,
    pub k_rank: usize,
}

impl<T: Scalar> StateChain<T> {
    pub fn m(&self) -> usize {
        self.sorted.order.len()
    }

    pub fn len(&self) -> usize {
        self.m() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn phi(&self, i: usize) -> bool {
        i < self.k_rank
    }

    pub fn phis(&self) -> Vec<bool> {
        (0..self.len()).map(|i| self.phi(i)).collect()
    }

    pub fn vector(&self, i: usize) -> StateVector {
        let mut x = StateVector::ones(self.m());
        for &c in &self.sorted.order[..i] {
            x.set(c, false);
        }
        x
    }

    /// All chain states in order, built incrementally.
    pub fn vectors(&self) -> impl Iterator<Item = StateVector> + '_ {
        chain_vectors(&self.sorted.order)
    }
}

/// The `M + 1` state vectors obtained by failing components in `order`.
pub fn chain_vectors(order: &[usize]) -> impl Iterator<Item = StateVector> + '_ {
    let mut x = StateVector::ones(order.len());
    let mut step = 0;
    std::iter::from_fn(move || {
        if step > order.len() {
            return None;
        }
        if step > 0 {
            x.set(order[step - 1], false);
        }
        step += 1;
        Some(x.clone())
    })
}

/// Sorts the sample, finds its K-terminal lifetime once and labels the chain.
pub fn build_chain<T: Scalar>(net: &Network, sample: &LifetimeSample<T>) -> Result<StateChain<T>> {
    let k = k_lifetime(net, sample)?;
    Ok(StateChain {
        sorted: SortedSample::new(&sample.times),
        k_lifetime: k.time,
        k_rank: k.rank,
    })
}
