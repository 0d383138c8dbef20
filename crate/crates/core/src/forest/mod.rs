//! Bagged CART classifier over binary state vectors.
//!
//! Label `true` means the network works. Prediction probabilities are vote
//! fractions: `p_fail` is the share of trees voting "failed".

mod tree;

pub use tree::{DecisionTree, Node};

use crate::net_model::StateVector;
use crate::scalar::Scalar;
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use tree::RowMatrix;

/// Unique labelled state vectors.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "TrainingRows", into = "TrainingRows")]
pub struct TrainingSet {
    dim: usize,
    inputs: Vec<StateVector>,
    labels: Vec<bool>,
    index: HashMap<StateVector, usize>,
}

#[derive(Serialize, Deserialize)]
struct TrainingRows {
    dim: usize,
    rows: Vec<(StateVector, bool)>,
}

impl From<TrainingRows> for TrainingSet {
    fn from(t: TrainingRows) -> Self {
        let mut set = TrainingSet::new(t.dim);
        for (x, y) in t.rows {
            // Files are written from consistent sets; a bad row is dropped by `add`'s checks.
            let _ = set.add(x, y);
        }
        set
    }
}

impl From<TrainingSet> for TrainingRows {
    fn from(t: TrainingSet) -> Self {
        Self {
            dim: t.dim,
            rows: t.inputs.into_iter().zip(t.labels).collect(),
        }
    }
}

impl TrainingSet {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            ..Self::default()
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn inputs(&self) -> &[StateVector] {
        &self.inputs
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn label_of(&self, x: &StateVector) -> Option<bool> {
        self.index.get(x).map(|&i| self.labels[i])
    }

    pub fn contains(&self, x: &StateVector) -> bool {
        self.index.contains_key(x)
    }

    /// Adds a row; returns `false` if the vector was already present.
    pub fn add(&mut self, x: StateVector, label: bool) -> Result<bool> {
        if x.len() != self.dim {
            return Err(Error::LengthMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        match self.index.get(&x) {
            Some(&i) if self.labels[i] != label => Err(Error::ConflictingLabel),
            Some(_) => Ok(false),
            None => {
                self.index.insert(x.clone(), self.inputs.len());
                self.inputs.push(x);
                self.labels.push(label);
                Ok(true)
            }
        }
    }

    fn matrix(&self) -> RowMatrix {
        let stride = self.dim.div_ceil(64).max(1);
        let mut words = Vec::with_capacity(stride * self.len());
        for x in &self.inputs {
            let w = x.words();
            words.extend_from_slice(w);
            words.extend(std::iter::repeat_n(0, stride - w.len()));
        }
        RowMatrix {
            dim: self.dim,
            stride,
            words,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// Candidate features per split; `None` uses every feature.
    pub mtry: Option<usize>,
    /// Resample rows with replacement for each tree. Disabling it gives
    /// every tree the full training set.
    pub bootstrap: bool,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 100,
            mtry: None,
            bootstrap: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prediction<T> {
    pub label: bool,
    pub p_fail: T,
    pub p_work: T,
}

impl<T: Scalar> Prediction<T> {
    /// Vote shares from a count of "failed" votes. Ties predict failure.
    pub fn from_votes(fail_votes: usize, n_trees: usize) -> Self {
        let p_fail = T::of(fail_votes as f64 / n_trees as f64);
        Self {
            label: 2 * fail_votes < n_trees,
            p_fail,
            p_work: T::one() - p_fail,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    dim: usize,
    mtry: usize,
    seed: u64,
    bootstrap: bool,
    trees: Vec<DecisionTree>,
}

impl Forest {
    /// Trains `n_trees` trees, tree `k` drawing from RNG stream `k` of `seed`.
    pub fn train(data: &TrainingSet, cfg: &ForestConfig, seed: u64) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        if cfg.n_trees == 0 {
            return Err(Error::InvalidParameter("n_trees must be positive".into()));
        }
        let dim = data.dim();
        let mtry = cfg.mtry.unwrap_or(dim).clamp(1, dim.max(1));
        let rows = data.matrix();
        let n = data.len();
        let trees = (0..cfg.n_trees)
            .into_par_iter()
            .map(|k| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(k as u64);
                let mut weights = vec![0u32; n];
                if cfg.bootstrap {
                    for _ in 0..n {
                        weights[rng.random_range(0..n)] += 1;
                    }
                } else {
                    weights.fill(1);
                }
                DecisionTree::grow(&rows, data.labels(), &weights, mtry, &mut rng)
            })
            .collect();
        Ok(Self {
            dim,
            mtry,
            seed,
            bootstrap: cfg.bootstrap,
            trees,
        })
    }

    /// Forest whose every tree returns `label`.
    pub fn constant(dim: usize, n_trees: usize, label: bool) -> Self {
        Self {
            dim,
            mtry: dim,
            seed: 0,
            bootstrap: false,
            trees: vec![DecisionTree::constant(label); n_trees.max(1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    pub fn mtry(&self) -> usize {
        self.mtry
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    fn check(&self, x: &StateVector) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::LengthMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        Ok(())
    }

    /// Number of trees voting "failed".
    pub fn fail_votes(&self, x: &StateVector) -> Result<usize> {
        self.check(x)?;
        let words = x.words();
        let bit = |f: usize| words[f / 64] >> (f % 64) & 1 == 1;
        Ok(self.trees.iter().filter(|t| !t.predict_with(bit)).count())
    }

    pub fn predict<T: Scalar>(&self, x: &StateVector) -> Result<Prediction<T>> {
        Ok(Prediction::from_votes(self.fail_votes(x)?, self.n_trees()))
    }

    pub fn predict_batch<T: Scalar>(&self, xs: &[StateVector]) -> Result<Vec<Prediction<T>>> {
        xs.par_iter().map(|x| self.predict(x)).collect()
    }

    pub fn fail_votes_batch(&self, xs: &[StateVector]) -> Result<Vec<usize>> {
        xs.par_iter().map(|x| self.fail_votes(x)).collect()
    }
}
