//! Network files, model files and result serialisation.

use crate::learner::Surrogate;
use crate::lifetimes::LifetimeDistribution;
use crate::net_model::{FailureMode, Network, NetworkParts};
use crate::scalar::Scalar;
use crate::signature::{RelativeError, ReliabilityCurve, SignatureTable};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::Path;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const MODEL_FORMAT: &str = "netrel-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassSpec<T> {
    /// Edge ids `e<k>` (1-based) under edge failure, node ids under node failure.
    pub members: Vec<String>,
    pub distribution: LifetimeDistribution<T>,
}

/// JSON network description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile<T> {
    pub name: String,
    pub failure_mode: FailureMode,
    pub nodes: Vec<String>,
    pub edges: Vec<[String; 2]>,
    pub terminals: Vec<String>,
    #[serde(default)]
    pub reliable_nodes: Vec<String>,
    pub classes: BTreeMap<u32, ClassSpec<T>>,
}

impl<T: Scalar> NetworkFile<T> {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("network files serialise")
    }

    /// Builds the network and its per-class distributions, in ascending class id order.
    pub fn to_network(&self) -> Result<(Network, Vec<LifetimeDistribution<T>>)> {
        let mut index = HashMap::new();
        for (i, id) in self.nodes.iter().enumerate() {
            if index.insert(id.as_str(), i).is_some() {
                return Err(Error::Parse(format!("duplicate node id `{id}`")));
            }
        }
        let node = |id: &String| {
            index
                .get(id.as_str())
                .copied()
                .ok_or_else(|| Error::UnknownNode(id.clone()))
        };
        let edges = self
            .edges
            .iter()
            .map(|[u, v]| Ok((node(u)?, node(v)?)))
            .collect::<Result<Vec<_>>>()?;
        let member = |id: &String| -> Result<usize> {
            match self.failure_mode {
                FailureMode::NodeFailure => node(id),
                FailureMode::EdgeFailure => id
                    .strip_prefix('e')
                    .and_then(|k| k.parse::<usize>().ok())
                    .filter(|&k| 1 <= k && k <= edges.len())
                    .map(|k| k - 1)
                    .ok_or_else(|| Error::UnknownComponent(id.clone())),
            }
        };
        let mut classes = Vec::new();
        let mut dists = Vec::new();
        for spec in self.classes.values() {
            classes.push(
                spec.members
                    .iter()
                    .map(member)
                    .collect::<Result<Vec<_>>>()?,
            );
            dists.push(spec.distribution.checked()?);
        }
        let parts = NetworkParts {
            name: self.name.clone(),
            failure_mode: self.failure_mode,
            nodes: self.nodes.clone(),
            edges,
            terminals: self.terminals.iter().map(node).collect::<Result<_>>()?,
            reliable_nodes: self
                .reliable_nodes
                .iter()
                .map(node)
                .collect::<Result<_>>()?,
            classes,
            class_ids: self.classes.keys().copied().collect(),
        };
        Ok((Network::from_parts(parts)?, dists))
    }

    pub fn from_network(net: &Network, dists: &[LifetimeDistribution<T>]) -> Result<Self> {
        let p = net.parts();
        if dists.len() != p.classes.len() {
            return Err(Error::LengthMismatch {
                expected: p.classes.len(),
                found: dists.len(),
            });
        }
        let element_id = |e: usize| match p.failure_mode {
            FailureMode::EdgeFailure => format!("e{}", e + 1),
            FailureMode::NodeFailure => p.nodes[e].clone(),
        };
        Ok(Self {
            name: p.name.clone(),
            failure_mode: p.failure_mode,
            nodes: p.nodes.clone(),
            edges: p
                .edges
                .iter()
                .map(|&(u, v)| [p.nodes[u].clone(), p.nodes[v].clone()])
                .collect(),
            terminals: p.terminals.iter().map(|&t| p.nodes[t].clone()).collect(),
            reliable_nodes: p
                .reliable_nodes
                .iter()
                .map(|&v| p.nodes[v].clone())
                .collect(),
            classes: p
                .class_ids
                .iter()
                .zip(&p.classes)
                .zip(dists)
                .map(|((&id, members), &distribution)| {
                    (
                        id,
                        ClassSpec {
                            members: members.iter().map(|&e| element_id(e)).collect(),
                            distribution,
                        },
                    )
                })
                .collect(),
        })
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Hash of the failure mode and canonical component order.
pub fn ordering_hash(net: &Network) -> String {
    let mut text = format!("{:?}", net.failure_mode());
    for i in 0..net.m() {
        text.push('\n');
        text.push_str(&net.component_id(i));
    }
    sha256_hex(text.as_bytes())
}

/// Versioned surrogate bound to the component order it was trained on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub dimension: usize,
    pub ordering_hash: String,
    pub surrogate: Surrogate,
}

impl ModelFile {
    pub fn new(net: &Network, surrogate: Surrogate) -> Self {
        Self {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            dimension: net.m(),
            ordering_hash: ordering_hash(net),
            surrogate,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let model: Self = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if model.format != MODEL_FORMAT || model.version != MODEL_VERSION {
            return Err(Error::ModelMismatch(format!(
                "unsupported model format {} v{}",
                model.format, model.version
            )));
        }
        Ok(model)
    }

    /// Rejects models trained on a different dimension or component order.
    pub fn check(&self, net: &Network) -> Result<()> {
        if self.dimension != net.m() || self.surrogate.dim() != net.m() {
            return Err(Error::ModelMismatch(format!(
                "model has {} components, network has {}",
                self.dimension,
                net.m()
            )));
        }
        if self.ordering_hash != ordering_hash(net) {
            return Err(Error::ModelMismatch("component ordering differs".into()));
        }
        Ok(())
    }
}

/// Reproducibility stamp written into every artifact.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Meta {
    pub version: String,
    pub seed: Option<u64>,
    pub config: String,
}

impl Meta {
    pub fn new(seed: Option<u64>, config: &impl Serialize) -> Self {
        let text = serde_json::to_string(config).expect("configs serialise");
        Self {
            version: VERSION.into(),
            seed,
            config: sha256_hex(text.as_bytes()),
        }
    }

    fn header(&self) -> String {
        let seed = self
            .seed
            .map_or_else(|| "none".to_string(), |s| s.to_string());
        format!(
            "# netrel {} seed={} config={}\n",
            self.version, seed, self.config
        )
    }
}

fn num<T: Scalar>(v: T) -> String {
    format!("{:?}", v.as_f64())
}

pub fn curve_csv<T: Scalar>(
    meta: &Meta,
    curve: &ReliabilityCurve<T>,
    re: Option<&RelativeError<T>>,
) -> String {
    let mut out = meta.header();
    out.push_str(if re.is_some() { "t,R,RE\n" } else { "t,R\n" });
    for (i, (&t, &r)) in curve.grid.iter().zip(&curve.values).enumerate() {
        let _ = write!(out, "{},{}", num(t), num(r));
        if let Some(re) = re {
            out.push(',');
            if let Some(e) = re.per_point[i] {
                out.push_str(&num(e));
            }
        }
        out.push('\n');
    }
    out
}

/// Flag column: `envelope` for filled combinations, `unvisited` for ones left empty.
pub fn signature_csv(meta: &Meta, table: &SignatureTable) -> String {
    let mut out = meta.header();
    for s in 1..=table.class_sizes().len() {
        let _ = write!(out, "l_{s},");
    }
    out.push_str("n_surv,n_fail,phi_hat,flag\n");
    for (idx, row) in table.rows().iter().enumerate() {
        for l in &row.key {
            let _ = write!(out, "{l},");
        }
        let phi = row.phi_hat.map(|p| format!("{p:?}")).unwrap_or_default();
        let flag = if table.is_filled(idx) {
            "envelope"
        } else if !table.is_visited(idx) {
            "unvisited"
        } else {
            ""
        };
        let _ = writeln!(out, "{},{},{},{}", row.n_surv, row.n_fail, phi, flag);
    }
    out
}

#[derive(Serialize)]
struct CurveDoc<'a, T> {
    meta: &'a Meta,
    grid: &'a [T],
    values: &'a [T],
    #[serde(skip_serializing_if = "Option::is_none")]
    relative_error: Option<&'a RelativeError<T>>,
}

pub fn curve_json<T: Scalar>(
    meta: &Meta,
    curve: &ReliabilityCurve<T>,
    re: Option<&RelativeError<T>>,
) -> String {
    let doc = CurveDoc {
        meta,
        grid: &curve.grid,
        values: &curve.values,
        relative_error: re,
    };
    serde_json::to_string_pretty(&doc).expect("curves serialise") + "\n"
}

#[derive(Serialize, Deserialize)]
pub struct SignatureFile {
    pub meta: Meta,
    pub signature: SignatureTable,
}

pub fn signature_json(meta: &Meta, table: &SignatureTable) -> String {
    let doc = SignatureFile {
        meta: meta.clone(),
        signature: table.clone(),
    };
    serde_json::to_string_pretty(&doc).expect("tables serialise") + "\n"
}

pub fn json_with_meta(meta: &Meta, key: &str, value: &impl Serialize) -> String {
    let mut map = serde_json::Map::new();
    map.insert(
        "meta".into(),
        serde_json::to_value(meta).expect("meta serialises"),
    );
    map.insert(
        key.into(),
        serde_json::to_value(value).expect("value serialises"),
    );
    serde_json::to_string_pretty(&map).expect("json serialises") + "\n"
}

pub fn write(dir: &Path, name: &str, contents: &str) -> Result<std::path::PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, contents)?;
    Ok(path)
}
