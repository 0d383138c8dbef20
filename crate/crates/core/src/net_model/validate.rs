use super::{FailureMode, Network};
use serde::Serialize;
use std::collections::HashSet;
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "detail", rename_all = "snake_case")]
pub enum Violation {
    NotConnected,
    TooFewTerminals(usize),
    DuplicateTerminal(String),
    TerminalUnreliable(String),
    SelfLoop(String),
    DuplicateEdge(String),
    Unclassified(String),
    MultipleClasses(String),
    ReliableClassed(String),
    ClassGap(u32),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotConnected => write!(f, "not connected"),
            Violation::TooFewTerminals(n) => write!(f, "need at least 2 terminals, got {n}"),
            Violation::DuplicateTerminal(t) => write!(f, "duplicate terminal {t}"),
            Violation::TerminalUnreliable(t) => write!(f, "terminal must be reliable: {t}"),
            Violation::SelfLoop(e) => write!(f, "self-loop {e}"),
            Violation::DuplicateEdge(e) => write!(f, "duplicate edge {e}"),
            Violation::Unclassified(c) => write!(f, "component {c} has no class"),
            Violation::MultipleClasses(c) => write!(f, "component {c} is in several classes"),
            Violation::ReliableClassed(c) => {
                write!(f, "node {c} is declared reliable but assigned a class")
            }
            Violation::ClassGap(s) => write!(f, "class ids must be contiguous from 1; missing {s}"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> crate::Result<()> {
        if self.is_ok() {
            Ok(())
        } else {
            Err(crate::Error::Invalid(self))
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", parts.join("; "))
    }
}

pub fn validate(net: &Network) -> ValidationReport {
    let parts = net.parts();
    let mut out = Vec::new();
    let node = |i: usize| parts.nodes[i].clone();
    let edge = |e: usize| {
        let (u, v) = parts.edges[e];
        format!("e{} ({}-{})", e + 1, parts.nodes[u], parts.nodes[v])
    };

    if parts.terminals.len() < 2 {
        out.push(Violation::TooFewTerminals(parts.terminals.len()));
    }
    let mut seen = HashSet::new();
    for &t in &parts.terminals {
        if !seen.insert(t) {
            out.push(Violation::DuplicateTerminal(node(t)));
        }
    }

    let mut pairs = HashSet::new();
    for (e, &(u, v)) in parts.edges.iter().enumerate() {
        if u == v {
            out.push(Violation::SelfLoop(edge(e)));
        } else if !pairs.insert((u.min(v), u.max(v))) {
            out.push(Violation::DuplicateEdge(edge(e)));
        }
    }

    if !net.is_connected() {
        out.push(Violation::NotConnected);
    }

    let n_elements = match parts.failure_mode {
        FailureMode::EdgeFailure => parts.edges.len(),
        FailureMode::NodeFailure => parts.nodes.len(),
    };
    let mut membership = vec![0usize; n_elements];
    for &m in parts.classes.iter().flatten() {
        membership[m] += 1;
    }
    let describe = |m: usize| match parts.failure_mode {
        FailureMode::EdgeFailure => edge(m),
        FailureMode::NodeFailure => node(m),
    };
    for (m, &count) in membership.iter().enumerate() {
        if count > 1 {
            out.push(Violation::MultipleClasses(describe(m)));
        }
        match parts.failure_mode {
            FailureMode::EdgeFailure if count == 0 => {
                out.push(Violation::Unclassified(describe(m)));
            }
            FailureMode::NodeFailure if count > 0 => {
                if parts.terminals.contains(&m) {
                    out.push(Violation::TerminalUnreliable(node(m)));
                } else if parts.reliable_nodes.contains(&m) {
                    out.push(Violation::ReliableClassed(node(m)));
                }
            }
            _ => {}
        }
    }

    let mut ids = parts.class_ids.clone();
    ids.sort_unstable();
    ids.dedup();
    for (expected, id) in (1u32..).zip(ids.iter()) {
        if *id != expected {
            out.push(Violation::ClassGap(expected));
            break;
        }
    }

    ValidationReport { violations: out }
}
