//! Graph representation, component bookkeeping and state vectors.
//!
//! Components are the unreliable elements of a network: every edge under
//! [`FailureMode::EdgeFailure`], and every class-assigned non-terminal node
//! under [`FailureMode::NodeFailure`]. Component `i` is bit `i` of a
//! [`StateVector`]; the canonical order is input order of the underlying
//! edges or nodes.

mod state;
mod validate;
mod variant;

pub use state::{CombinationKey, StateVector};
pub use validate::{validate, ValidationReport, Violation};
pub use variant::{derive_variant, derive_variant_by_id, Mask};

use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureMode {
    NodeFailure,
    EdgeFailure,
}

/// Raw description of a network using node and edge indices.
#[derive(Clone, Debug)]
pub struct NetworkParts {
    pub name: String,
    pub failure_mode: FailureMode,
    pub nodes: Vec<String>,
    pub edges: Vec<(usize, usize)>,
    pub terminals: Vec<usize>,
    /// Non-terminal nodes declared perfectly reliable (node failure only).
    pub reliable_nodes: Vec<usize>,
    /// Members of each class, as edge indices or node indices depending on the failure mode.
    pub classes: Vec<Vec<usize>>,
    /// Declared class labels; `1..=S` when built programmatically.
    pub class_ids: Vec<u32>,
}

/// Undirected two-terminal (or K-terminal) network with classed components.
#[derive(Clone, Debug)]
pub struct Network {
    parts: NetworkParts,
    components: Vec<usize>,
    component_class: Vec<usize>,
    class_sizes: Vec<usize>,
    element_component: Vec<Option<usize>>,
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl Network {
    /// Builds the network and its canonical component ordering.
    ///
    /// Only dangling indices are rejected here; invariant violations are
    /// reported by [`validate`].
    pub fn from_parts(parts: NetworkParts) -> Result<Self> {
        let n_v = parts.nodes.len();
        let check_node = |i: usize| {
            if i < n_v {
                Ok(())
            } else {
                Err(Error::UnknownNode(format!("#{i}")))
            }
        };
        for &(u, v) in &parts.edges {
            check_node(u)?;
            check_node(v)?;
        }
        for &t in parts.terminals.iter().chain(&parts.reliable_nodes) {
            check_node(t)?;
        }
        let n_elements = match parts.failure_mode {
            FailureMode::EdgeFailure => parts.edges.len(),
            FailureMode::NodeFailure => n_v,
        };
        for &m in parts.classes.iter().flatten() {
            if m >= n_elements {
                return Err(Error::UnknownComponent(format!("#{m}")));
            }
        }
        if parts.class_ids.len() != parts.classes.len() {
            return Err(Error::InvalidConfig(
                "class id list does not match class list".into(),
            ));
        }

        // First class wins when an element is listed twice; validate reports it.
        let mut element_class = vec![None; n_elements];
        for (s, members) in parts.classes.iter().enumerate() {
            for &m in members {
                element_class[m].get_or_insert(s);
            }
        }

        let mut components = Vec::new();
        let mut component_class = Vec::new();
        match parts.failure_mode {
            FailureMode::EdgeFailure => {
                for (e, class) in element_class.iter().enumerate() {
                    components.push(e);
                    component_class.push(class.unwrap_or(0));
                }
            }
            FailureMode::NodeFailure => {
                for (v, class) in element_class.iter().enumerate() {
                    let excluded =
                        parts.terminals.contains(&v) || parts.reliable_nodes.contains(&v);
                    if let (Some(s), false) = (class, excluded) {
                        components.push(v);
                        component_class.push(*s);
                    }
                }
            }
        }
        let mut class_sizes = vec![0; parts.classes.len().max(1)];
        if parts.classes.is_empty() {
            class_sizes.clear();
        }
        for &s in &component_class {
            if s < class_sizes.len() {
                class_sizes[s] += 1;
            }
        }
        let mut element_component = vec![None; n_elements];
        for (i, &e) in components.iter().enumerate() {
            element_component[e] = Some(i);
        }
        let mut adjacency = vec![Vec::new(); n_v];
        for (e, &(u, v)) in parts.edges.iter().enumerate() {
            adjacency[u].push((v, e));
            if u != v {
                adjacency[v].push((u, e));
            }
        }
        Ok(Self {
            parts,
            components,
            component_class,
            class_sizes,
            element_component,
            adjacency,
        })
    }

    /// Edge-failure network on nodes `v1..vn`, classes given as edge indices.
    pub fn edge_failure(
        n_nodes: usize,
        edges: &[(usize, usize)],
        terminals: &[usize],
        classes: Vec<Vec<usize>>,
    ) -> Result<Self> {
        Self::from_parts(NetworkParts {
            name: String::new(),
            failure_mode: FailureMode::EdgeFailure,
            nodes: (1..=n_nodes).map(|i| format!("v{i}")).collect(),
            edges: edges.to_vec(),
            terminals: terminals.to_vec(),
            reliable_nodes: Vec::new(),
            class_ids: (1..=classes.len() as u32).collect(),
            classes,
        })
    }

    /// Node-failure network on nodes `v1..vn`; nodes missing from every class are reliable.
    pub fn node_failure(
        n_nodes: usize,
        edges: &[(usize, usize)],
        terminals: &[usize],
        classes: Vec<Vec<usize>>,
    ) -> Result<Self> {
        Self::from_parts(NetworkParts {
            name: String::new(),
            failure_mode: FailureMode::NodeFailure,
            nodes: (1..=n_nodes).map(|i| format!("v{i}")).collect(),
            edges: edges.to_vec(),
            terminals: terminals.to_vec(),
            reliable_nodes: Vec::new(),
            class_ids: (1..=classes.len() as u32).collect(),
            classes,
        })
    }

    pub fn parts(&self) -> &NetworkParts {
        &self.parts
    }

    pub fn name(&self) -> &str {
        &self.parts.name
    }

    pub fn failure_mode(&self) -> FailureMode {
        self.parts.failure_mode
    }

    pub fn n_nodes(&self) -> usize {
        self.parts.nodes.len()
    }

    pub fn n_edges(&self) -> usize {
        self.parts.edges.len()
    }

    pub fn nodes(&self) -> &[String] {
        &self.parts.nodes
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.parts.edges
    }

    pub fn terminals(&self) -> &[usize] {
        &self.parts.terminals
    }

    /// Number of unreliable components, `M`.
    pub fn m(&self) -> usize {
        self.components.len()
    }

    pub fn n_classes(&self) -> usize {
        self.class_sizes.len()
    }

    pub fn class_sizes(&self) -> &[usize] {
        &self.class_sizes
    }

    /// Class index (0-based) of component `i`.
    pub fn class_of(&self, i: usize) -> usize {
        self.component_class[i]
    }

    pub fn component_classes(&self) -> &[usize] {
        &self.component_class
    }

    /// Edge or node index backing component `i`.
    pub fn component_element(&self, i: usize) -> usize {
        self.components[i]
    }

    /// Component index of an edge (edge failure) or node (node failure).
    pub fn element_component(&self, element: usize) -> Option<usize> {
        self.element_component.get(element).copied().flatten()
    }

    /// Neighbours of node `v` as `(node, edge)` pairs.
    pub fn neighbours(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[v]
    }

    /// External id of component `i`: `e<k>` (1-based edge position) or the node id.
    pub fn component_id(&self, i: usize) -> String {
        match self.failure_mode() {
            FailureMode::EdgeFailure => format!("e{}", self.components[i] + 1),
            FailureMode::NodeFailure => self.parts.nodes[self.components[i]].clone(),
        }
    }

    pub fn component_index(&self, id: &str) -> Option<usize> {
        (0..self.m()).find(|&i| self.component_id(i) == id)
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.parts.nodes.iter().position(|n| n == id)
    }

    fn check_len(&self, x: &StateVector) -> Result<()> {
        if x.len() == self.m() {
            Ok(())
        } else {
            Err(Error::LengthMismatch {
                expected: self.m(),
                found: x.len(),
            })
        }
    }

    /// Working-component counts per class for `x`.
    pub fn combination_of(&self, x: &StateVector) -> Result<CombinationKey> {
        self.check_len(x)?;
        let mut counts = vec![0; self.n_classes()];
        for (i, &s) in self.component_class.iter().enumerate() {
            if x.get(i) {
                counts[s] += 1;
            }
        }
        Ok(CombinationKey(counts))
    }

    /// Structure function by breadth-first search over the working subgraph.
    pub fn structure_function(&self, x: &StateVector) -> Result<bool> {
        self.check_len(x)?;
        let mode = self.failure_mode();
        let node_works = |v: usize| match mode {
            FailureMode::EdgeFailure => true,
            FailureMode::NodeFailure => self.element_component(v).is_none_or(|c| x.get(c)),
        };
        let edge_works = |e: usize| match mode {
            FailureMode::EdgeFailure => x.get(e),
            FailureMode::NodeFailure => true,
        };
        Ok(self.terminals_connected(node_works, edge_works))
    }

    /// Whether all terminals share a component of the subgraph induced by the predicates.
    pub(crate) fn terminals_connected(
        &self,
        node_works: impl Fn(usize) -> bool,
        edge_works: impl Fn(usize) -> bool,
    ) -> bool {
        let terminals = self.terminals();
        let Some(&start) = terminals.first() else {
            return true;
        };
        let mut seen = vec![false; self.n_nodes()];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(u) = queue.pop_front() {
            for &(v, e) in &self.adjacency[u] {
                if !seen[v] && edge_works(e) && node_works(v) {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        terminals.iter().all(|&t| seen[t])
    }

    /// Whether every node is reachable when all components work.
    pub fn is_connected(&self) -> bool {
        if self.n_nodes() == 0 {
            return true;
        }
        let mut seen = vec![false; self.n_nodes()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &(v, _) in &self.adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}
