use super::{FailureMode, Network, NetworkParts, StateVector};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Embeds variant state vectors into the original component ordering.
///
/// `kept[j]` is the original position of variant component `j`; every other
/// original position is fixed to 0 (failed).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mask {
    original_len: usize,
    kept: Vec<usize>,
}

impl Mask {
    pub fn identity(len: usize) -> Self {
        Self {
            original_len: len,
            kept: (0..len).collect(),
        }
    }

    pub fn original_len(&self) -> usize {
        self.original_len
    }

    pub fn variant_len(&self) -> usize {
        self.kept.len()
    }

    pub fn kept(&self) -> &[usize] {
        &self.kept
    }

    pub fn is_identity(&self) -> bool {
        self.kept.len() == self.original_len
    }

    pub fn embed(&self, x: &StateVector) -> Result<StateVector> {
        if x.len() != self.kept.len() {
            return Err(Error::LengthMismatch {
                expected: self.kept.len(),
                found: x.len(),
            });
        }
        let mut out = StateVector::zeros(self.original_len);
        for (j, &i) in self.kept.iter().enumerate() {
            if x.get(j) {
                out.set(i, true);
            }
        }
        Ok(out)
    }
}

/// Deletes components (given by component index) from `net`.
///
/// Edge failure deletes edges; node failure deletes nodes with their incident
/// edges. Classes keep their indices and are re-tallied, so a class may end up
/// empty.
pub fn derive_variant(net: &Network, removed: &[usize]) -> Result<(Network, Mask)> {
    let m = net.m();
    let mut drop = vec![false; m];
    for &c in removed {
        if c >= m {
            return Err(Error::InvalidRemoval(format!("no component #{c}")));
        }
        drop[c] = true;
    }
    let parts = net.parts();
    let mut variant = NetworkParts {
        name: if parts.name.is_empty() {
            String::new()
        } else {
            format!("{}-variant", parts.name)
        },
        ..parts.clone()
    };

    match net.failure_mode() {
        FailureMode::EdgeFailure => {
            let removed_edge = |e: usize| net.element_component(e).is_some_and(|c| drop[c]);
            let mut new_index = vec![None; parts.edges.len()];
            let mut edges = Vec::new();
            for (e, &uv) in parts.edges.iter().enumerate() {
                if !removed_edge(e) {
                    new_index[e] = Some(edges.len());
                    edges.push(uv);
                }
            }
            variant.edges = edges;
            variant.classes = remap_classes(&parts.classes, &new_index);
        }
        FailureMode::NodeFailure => {
            let removed_node = |v: usize| net.element_component(v).is_some_and(|c| drop[c]);
            let mut new_index = vec![None; parts.nodes.len()];
            let mut nodes = Vec::new();
            for (v, id) in parts.nodes.iter().enumerate() {
                if !removed_node(v) {
                    new_index[v] = Some(nodes.len());
                    nodes.push(id.clone());
                }
            }
            variant.nodes = nodes;
            variant.edges = parts
                .edges
                .iter()
                .filter_map(|&(u, v)| Some((new_index[u]?, new_index[v]?)))
                .collect();
            variant.terminals = parts
                .terminals
                .iter()
                .filter_map(|&t| new_index[t])
                .collect();
            variant.reliable_nodes = parts
                .reliable_nodes
                .iter()
                .filter_map(|&v| new_index[v])
                .collect();
            variant.classes = remap_classes(&parts.classes, &new_index);
        }
    }

    let variant = Network::from_parts(variant)?;
    if !variant.is_connected() || !variant.terminals_connected(|_| true, |_| true) {
        return Err(Error::VariantDisconnected);
    }
    let kept = (0..m).filter(|&c| !drop[c]).collect();
    Ok((
        variant,
        Mask {
            original_len: m,
            kept,
        },
    ))
}

/// Resolves external component ids and derives the variant.
pub fn derive_variant_by_id(net: &Network, ids: &[String]) -> Result<(Network, Mask)> {
    let mut removed = Vec::with_capacity(ids.len());
    for id in ids {
        if let Some(t) = net.node_index(id) {
            if net.terminals().contains(&t) {
                return Err(Error::InvalidRemoval(format!("`{id}` is a terminal")));
            }
        }
        match net.component_index(id) {
            Some(c) => removed.push(c),
            None => {
                return Err(Error::InvalidRemoval(format!(
                    "`{id}` is not an unreliable component"
                )))
            }
        }
    }
    derive_variant(net, &removed)
}

fn remap_classes(classes: &[Vec<usize>], new_index: &[Option<usize>]) -> Vec<Vec<usize>> {
    classes
        .iter()
        .map(|members| members.iter().filter_map(|&m| new_index[m]).collect())
        .collect()
}
