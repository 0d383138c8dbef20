//! Active-learning signature estimation around a forest surrogate.
//!
//! A handful of samples are labelled by spanning-tree runs, a forest is
//! trained on their chain states and used to predict the rest of the pool.
//! Samples whose unlabelled states the forest is least sure about are
//! labelled next, until the share of uncertain predictions stays below a
//! tolerance on consecutive checks.

mod run;

pub use run::{predict_variant, run_al_kst, run_rf_kst, AlKstOutput, RfKstOutput, Surrogate};

use crate::forest::{Forest, ForestConfig, TrainingSet};
use crate::kst::{build_chain, chain_vectors, SortedSample, StateChain};
use crate::lifetimes::{LifetimeSample, SamplePool};
use crate::net_model::{Network, StateVector};
use crate::scalar::Scalar;
use crate::signature::{Provenance, SignatureTable};
use crate::{Error, Result};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnerConfig {
    /// Pool size; the first `n_mcs` samples of the pool are used.
    pub n_mcs: usize,
    pub n_ini: usize,
    pub n_add: usize,
    pub delta: f64,
    pub forest: ForestConfig,
    /// Inclusive range of failure-vote shares counted as uncertain.
    pub band: (f64, f64),
    /// Consecutive passing checks required to stop.
    pub delayed: usize,
    pub seed: u64,
}

impl LearnerConfig {
    /// Defaults: `n_ini = 2 n_v`, `n_add = 2 (n_v - 2) + 4 n_e`, `delta = 0.005`.
    pub fn for_network(net: &Network, n_mcs: usize, seed: u64) -> Self {
        let (n_v, n_e) = (net.n_nodes(), net.n_edges());
        Self {
            n_mcs,
            n_ini: 2 * n_v,
            n_add: 2 * n_v.saturating_sub(2) + 4 * n_e,
            delta: 0.005,
            forest: ForestConfig::default(),
            band: (0.4, 0.6),
            delayed: 2,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.into()));
        if self.n_ini == 0 || self.n_add == 0 {
            return bad("n_ini and n_add must be positive");
        }
        if self.n_ini > self.n_mcs {
            return bad("n_ini exceeds the pool size");
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return bad("delta must lie in (0, 1]");
        }
        let (lo, hi) = self.band;
        if !(0.0 < lo && lo <= hi && hi < 1.0) {
            return bad("uncertainty band must lie within (0, 1)");
        }
        if self.delayed == 0 {
            return bad("delayed judgment count must be positive");
        }
        if self.forest.n_trees == 0 {
            return bad("n_trees must be positive");
        }
        Ok(())
    }
}

/// One unlabelled pool sample.
#[derive(Clone, Debug)]
pub struct PoolEntry<T> {
    pub id: usize,
    pub sample: LifetimeSample<T>,
    pub order: Vec<usize>,
}

/// One stopping check of the loop.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub check: usize,
    pub forest_seed: u64,
    pub train_size: usize,
    pub pool_size: usize,
    pub uncertain: usize,
    pub ratio: f64,
    pub passed: bool,
    pub consecutive: usize,
    /// Samples labelled after this check.
    pub batch: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditLog {
    pub n_mcs: usize,
    pub n_ini: usize,
    pub n_add: usize,
    pub delta: f64,
    pub checks: Vec<CheckRecord>,
    pub enrichments: usize,
    pub labeled_samples: usize,
    pub kst_runs: usize,
}

pub struct LearnerState<T> {
    m: usize,
    pub train: TrainingSet,
    labeled: Vec<(usize, StateChain<T>)>,
    pool: Vec<PoolEntry<T>>,
    fail_votes: HashMap<StateVector, usize>,
    forest: Option<Forest>,
    consecutive: usize,
    checks: Vec<CheckRecord>,
    kst_runs: usize,
}

/// Seed of the `k`-th forest trained under `seed`.
pub fn forest_seed(seed: u64, k: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1 << 32 | k as u64);
    rng.next_u64()
}

fn label_chains<T: Scalar>(
    net: &Network,
    samples: &[(usize, &LifetimeSample<T>)],
) -> Result<Vec<(usize, StateChain<T>)>> {
    samples
        .par_iter()
        .map(|&(id, s)| Ok((id, build_chain(net, s)?)))
        .collect()
}

impl<T: Scalar> LearnerState<T> {
    /// Labels the first `n_ini` samples and keeps the remainder as the pool.
    pub fn init(net: &Network, pool: &SamplePool<T>, cfg: &LearnerConfig) -> Result<Self> {
        cfg.validate()?;
        if pool.len() < cfg.n_mcs {
            return Err(Error::PoolTooSmall {
                need: cfg.n_mcs,
                have: pool.len(),
            });
        }
        let m = net.m();
        let first: Vec<_> = pool.samples[..cfg.n_ini].iter().enumerate().collect();
        let labeled = label_chains(net, &first)?;
        let rest = pool.samples[cfg.n_ini..cfg.n_mcs]
            .par_iter()
            .enumerate()
            .map(|(k, s)| PoolEntry {
                id: cfg.n_ini + k,
                order: SortedSample::new(&s.times).order,
                sample: s.clone(),
            })
            .collect();
        let mut state = Self {
            m,
            train: TrainingSet::new(m),
            labeled: Vec::new(),
            pool: rest,
            fail_votes: HashMap::new(),
            forest: None,
            consecutive: 0,
            checks: Vec::new(),
            kst_runs: cfg.n_ini,
        };
        state.absorb(labeled)?;
        Ok(state)
    }

    fn absorb(&mut self, chains: Vec<(usize, StateChain<T>)>) -> Result<()> {
        for (id, chain) in chains {
            for (i, x) in chain.vectors().enumerate() {
                self.train.add(x, chain.phi(i))?;
            }
            self.labeled.push((id, chain));
        }
        Ok(())
    }

    pub fn pool(&self) -> &[PoolEntry<T>] {
        &self.pool
    }

    pub fn labeled_ids(&self) -> Vec<usize> {
        self.labeled.iter().map(|(id, _)| *id).collect()
    }

    pub fn forest(&self) -> Option<&Forest> {
        self.forest.as_ref()
    }

    pub fn checks(&self) -> &[CheckRecord] {
        &self.checks
    }

    pub fn kst_runs(&self) -> usize {
        self.kst_runs
    }

    /// Trains a fresh forest and predicts every unlabelled pool state.
    pub fn refit(&mut self, cfg: &LearnerConfig) -> Result<()> {
        let seed = forest_seed(cfg.seed, self.checks.len());
        let forest = Forest::train(&self.train, &cfg.forest, seed)?;
        let unique: BTreeSet<StateVector> = self
            .pool
            .iter()
            .flat_map(|e| chain_vectors(&e.order))
            .filter(|x| !self.train.contains(x))
            .collect();
        let unique: Vec<StateVector> = unique.into_iter().collect();
        let votes = forest.fail_votes_batch(&unique)?;
        self.fail_votes = unique.into_iter().zip(votes).collect();
        self.forest = Some(forest);
        Ok(())
    }

    fn n_trees(&self) -> usize {
        self.forest.as_ref().map_or(1, Forest::n_trees)
    }

    /// Failure-vote share of an unlabelled state; `None` for labelled ones.
    pub fn p_fail(&self, x: &StateVector) -> Option<f64> {
        self.fail_votes
            .get(x)
            .map(|&v| v as f64 / self.n_trees() as f64)
    }

    /// Pool states (with multiplicity) whose failure share lies in `band`.
    pub fn uncertainty_count(&self, band: (f64, f64)) -> usize {
        self.pool
            .iter()
            .flat_map(|e| chain_vectors(&e.order))
            .filter_map(|x| self.p_fail(&x))
            .filter(|&p| band.0 <= p && p <= band.1)
            .count()
    }

    /// Share of uncertain states among all pool states; an empty pool passes.
    pub fn uncertainty_ratio(&self, band: (f64, f64)) -> (usize, f64) {
        let n = self.uncertainty_count(band);
        let states = self.pool.len() * (self.m + 1);
        (
            n,
            if states == 0 {
                0.0
            } else {
                n as f64 / states as f64
            },
        )
    }

    /// Runs one stopping check and records it.
    pub fn check(&mut self, cfg: &LearnerConfig) -> &CheckRecord {
        let (uncertain, ratio) = self.uncertainty_ratio(cfg.band);
        let passed = ratio <= cfg.delta;
        self.consecutive = if passed { self.consecutive + 1 } else { 0 };
        let record = CheckRecord {
            check: self.checks.len(),
            forest_seed: self.forest.as_ref().map_or(0, Forest::seed),
            train_size: self.train.len(),
            pool_size: self.pool.len(),
            uncertain,
            ratio,
            passed,
            consecutive: self.consecutive,
            batch: Vec::new(),
        };
        self.checks.push(record);
        self.checks.last().expect("just pushed")
    }

    pub fn should_stop(&self, cfg: &LearnerConfig) -> bool {
        self.consecutive >= cfg.delayed
    }

    /// Entropy of a pool sample's unlabelled states and its repeat weight.
    pub fn entropy_and_weight(&self, entry: &PoolEntry<T>) -> (f64, f64) {
        let mut entropy = 0.0;
        let mut repeats = 0usize;
        for x in chain_vectors(&entry.order) {
            match self.p_fail(&x) {
                Some(rho) => entropy -= xlnx(rho) + xlnx(1.0 - rho),
                None => repeats += 1,
            }
        }
        (entropy, 1.0 / repeats.max(1) as f64)
    }

    /// Ids of the `n_add` pool samples with the largest weighted entropy, ties by id.
    pub fn select_batch(&self, n_add: usize) -> Vec<usize> {
        let mut scored: Vec<(f64, usize)> = self
            .pool
            .par_iter()
            .map(|e| {
                let (entropy, w) = self.entropy_and_weight(e);
                (w * entropy, e.id)
            })
            .collect();
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let mut ids: Vec<usize> = scored.into_iter().take(n_add).map(|(_, id)| id).collect();
        ids.sort_unstable();
        ids
    }

    /// Labels the given pool samples by spanning-tree runs and moves them to the training set.
    pub fn enrich(&mut self, net: &Network, ids: &[usize]) -> Result<()> {
        let wanted: BTreeSet<usize> = ids.iter().copied().collect();
        let (picked, rest): (Vec<_>, Vec<_>) = std::mem::take(&mut self.pool)
            .into_iter()
            .partition(|e| wanted.contains(&e.id));
        self.pool = rest;
        let refs: Vec<_> = picked.iter().map(|e| (e.id, &e.sample)).collect();
        let chains = label_chains(net, &refs)?;
        self.kst_runs += chains.len();
        self.absorb(chains)?;
        if let Some(last) = self.checks.last_mut() {
            last.batch = picked.iter().map(|e| e.id).collect();
        }
        Ok(())
    }

    /// Label of a pool state: the known label if labelled, else the forest vote.
    fn pool_label(&self, x: &StateVector) -> bool {
        match self.train.label_of(x) {
            Some(y) => y,
            None => {
                let votes = self.fail_votes.get(x).copied().unwrap_or(0);
                2 * votes < self.n_trees()
            }
        }
    }

    /// Signature from labelled chains plus predicted pool chains.
    pub fn signature(&self, net: &Network) -> SignatureTable {
        let classes = net.component_classes();
        let mut table = SignatureTable::for_network(net, Provenance::Estimated);
        for (_, chain) in &self.labeled {
            table.record_chain(classes, &chain.sorted.order, |i| chain.phi(i));
        }
        for e in &self.pool {
            let labels: Vec<bool> = chain_vectors(&e.order)
                .map(|x| self.pool_label(&x))
                .collect();
            table.record_chain(classes, &e.order, |i| labels[i]);
        }
        table
    }

    pub fn audit(&self, cfg: &LearnerConfig) -> AuditLog {
        AuditLog {
            n_mcs: cfg.n_mcs,
            n_ini: cfg.n_ini,
            n_add: cfg.n_add,
            delta: cfg.delta,
            checks: self.checks.clone(),
            enrichments: self.checks.iter().filter(|c| !c.batch.is_empty()).count(),
            labeled_samples: self.labeled.len(),
            kst_runs: self.kst_runs,
        }
    }
}

#[inline]
fn xlnx(p: f64) -> f64 {
    if p > 0.0 {
        p * p.ln()
    } else {
        0.0
    }
}
