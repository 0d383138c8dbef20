use super::{forest_seed, label_chains, AuditLog, LearnerConfig, LearnerState};
use crate::forest::{Forest, TrainingSet};
use crate::kst::{chain_vectors, failure_order, SortedSample};
use crate::lifetimes::{LifetimeDistribution, SamplePool};
use crate::net_model::{Mask, Network, StateVector};
use crate::scalar::Scalar;
use crate::signature::{reliability, Provenance, ReliabilityCurve, SignatureTable};
use crate::{Error, Result};
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};

/// A trained forest together with the ground-truth labels it was trained on.
///
/// Known states are answered from the labels; the forest covers the rest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Surrogate {
    pub forest: Forest,
    pub known: TrainingSet,
}

impl Surrogate {
    pub fn dim(&self) -> usize {
        self.forest.dim()
    }

    pub fn label(&self, x: &StateVector) -> Result<bool> {
        match self.known.label_of(x) {
            Some(y) => Ok(y),
            None => Ok(self.forest.predict::<f64>(x)?.label),
        }
    }

    /// Labels for many states, predicting each distinct unknown state once.
    pub fn label_all(&self, xs: &BTreeSet<StateVector>) -> Result<HashMap<StateVector, bool>> {
        let unknown: Vec<StateVector> = xs
            .iter()
            .filter(|x| !self.known.contains(x))
            .cloned()
            .collect();
        let votes = self.forest.fail_votes_batch(&unknown)?;
        let n = self.forest.n_trees();
        let mut out: HashMap<StateVector, bool> = unknown
            .into_iter()
            .zip(votes)
            .map(|(x, v)| (x, 2 * v < n))
            .collect();
        for x in xs {
            if let Some(y) = self.known.label_of(x) {
                out.insert(x.clone(), y);
            }
        }
        Ok(out)
    }
}

pub struct AlKstOutput {
    pub table: SignatureTable,
    pub surrogate: Surrogate,
    pub audit: AuditLog,
}

/// Active-learning loop: refit, check, and label a batch after every failed check.
///
/// A passing check labels nothing; the next check refits with a new forest
/// seed on the same data, so stopping needs `delayed` consecutive passes of
/// differently seeded forests.
pub fn run_al_kst<T: Scalar>(
    net: &Network,
    pool: &SamplePool<T>,
    cfg: &LearnerConfig,
) -> Result<AlKstOutput> {
    let mut state = LearnerState::init(net, pool, cfg)?;
    loop {
        state.refit(cfg)?;
        let passed = state.check(cfg).passed;
        if state.should_stop(cfg) || state.pool().is_empty() {
            break;
        }
        if !passed {
            let ids = state.select_batch(cfg.n_add);
            state.enrich(net, &ids)?;
        }
    }
    let table = state.signature(net);
    let audit = state.audit(cfg);
    let forest = state.forest.take().expect("loop trains at least once");
    Ok(AlKstOutput {
        table,
        surrogate: Surrogate {
            forest,
            known: state.train,
        },
        audit,
    })
}

pub struct RfKstOutput {
    pub table: SignatureTable,
    pub surrogate: Surrogate,
    /// Pool ids that were labelled.
    pub labeled: Vec<usize>,
}

/// Baseline: label `n_train` uniformly drawn pool samples, train once, predict the rest.
pub fn run_rf_kst<T: Scalar>(
    net: &Network,
    pool: &SamplePool<T>,
    cfg: &LearnerConfig,
    n_train: usize,
) -> Result<RfKstOutput> {
    if pool.len() < cfg.n_mcs {
        return Err(Error::PoolTooSmall {
            need: cfg.n_mcs,
            have: pool.len(),
        });
    }
    if n_train == 0 {
        return Err(Error::EmptyTrainingSet);
    }
    if n_train > cfg.n_mcs {
        return Err(Error::InvalidConfig("n_train exceeds the pool size".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut ids = index::sample(&mut rng, cfg.n_mcs, n_train).into_vec();
    ids.sort_unstable();
    let chosen: BTreeSet<usize> = ids.iter().copied().collect();
    let refs: Vec<_> = ids.iter().map(|&j| (j, &pool.samples[j])).collect();
    let chains = label_chains(net, &refs)?;
    let mut known = TrainingSet::new(net.m());
    for (_, chain) in &chains {
        for (i, x) in chain.vectors().enumerate() {
            known.add(x, chain.phi(i))?;
        }
    }
    let forest = Forest::train(&known, &cfg.forest, forest_seed(cfg.seed, 0))?;
    let surrogate = Surrogate { forest, known };
    let classes = net.component_classes();
    let rest: Vec<Vec<usize>> = (0..cfg.n_mcs)
        .filter(|j| !chosen.contains(j))
        .map(|j| SortedSample::new(&pool.samples[j].times).order)
        .collect();
    let unique: BTreeSet<StateVector> = rest.iter().flat_map(|o| chain_vectors(o)).collect();
    let labels = surrogate.label_all(&unique)?;
    let mut table = SignatureTable::for_network(net, Provenance::Estimated);
    for (_, chain) in &chains {
        table.record_chain(classes, &chain.sorted.order, |i| chain.phi(i));
    }
    for order in &rest {
        let ys: Vec<bool> = chain_vectors(order).map(|x| labels[&x]).collect();
        table.record_chain(classes, order, |i| ys[i]);
    }
    Ok(RfKstOutput {
        table,
        surrogate,
        labeled: ids,
    })
}

/// Signature and reliability of a variant network predicted by the original
/// network's surrogate, without any new spanning-tree runs.
///
/// Variant states are embedded into the original dimension with removed
/// components failed.
pub fn predict_variant<T: Scalar>(
    original: &Network,
    surrogate: &Surrogate,
    variant: &Network,
    mask: &Mask,
    pool: &SamplePool<T>,
    dists: &[LifetimeDistribution<T>],
    grid: &[T],
) -> Result<(SignatureTable, ReliabilityCurve<T>)> {
    if surrogate.dim() != original.m() || mask.original_len() != original.m() {
        return Err(Error::LengthMismatch {
            expected: original.m(),
            found: surrogate.dim(),
        });
    }
    if mask.variant_len() != variant.m() {
        return Err(Error::LengthMismatch {
            expected: variant.m(),
            found: mask.variant_len(),
        });
    }
    if let Some(bad) = pool.samples.iter().find(|s| s.times.len() != variant.m()) {
        return Err(Error::LengthMismatch {
            expected: variant.m(),
            found: bad.times.len(),
        });
    }
    let table = if variant.m() <= MASK_CACHE_BITS {
        variant_table_cached(surrogate, variant, mask, pool)?
    } else {
        variant_table(surrogate, variant, mask, pool)?
    };
    let curve = reliability(&table, dists, grid)?;
    Ok((table, curve))
}

/// Largest variant size whose states get a dense label cache.
const MASK_CACHE_BITS: usize = 24;

/// Walks each chain as a bitmask and labels every distinct state once.
fn variant_table_cached<T: Scalar>(
    surrogate: &Surrogate,
    variant: &Network,
    mask: &Mask,
    pool: &SamplePool<T>,
) -> Result<SignatureTable> {
    const UNKNOWN: u8 = 0;
    const FAILED: u8 = 1;
    const WORKS: u8 = 2;
    let m = variant.m();
    let mut cache = vec![UNKNOWN; 1 << m];
    let classes = variant.component_classes();
    let mut table = SignatureTable::for_network(variant, Provenance::Estimated);
    let mut ys = vec![false; m + 1];
    for sample in &pool.samples {
        let order = failure_order(&sample.times);
        let mut x: u64 = (1u64 << m) - 1;
        for i in 0..=m {
            let slot = &mut cache[x as usize];
            if *slot == UNKNOWN {
                let works = surrogate.label(&mask.embed(&StateVector::from_mask(m, x))?)?;
                *slot = if works { WORKS } else { FAILED };
            }
            ys[i] = *slot == WORKS;
            if i < m {
                x &= !(1 << order[i]);
            }
        }
        table.record_chain(classes, &order, |i| ys[i]);
    }
    Ok(table)
}

fn variant_table<T: Scalar>(
    surrogate: &Surrogate,
    variant: &Network,
    mask: &Mask,
    pool: &SamplePool<T>,
) -> Result<SignatureTable> {
    let orders: Vec<Vec<usize>> = pool
        .samples
        .par_iter()
        .map(|s| failure_order(&s.times))
        .collect();
    let mut unique = BTreeSet::new();
    for order in &orders {
        for x in chain_vectors(order) {
            unique.insert(x);
        }
    }
    let embedded: Vec<StateVector> = unique
        .iter()
        .map(|x| mask.embed(x))
        .collect::<Result<_>>()?;
    let embedded_set: BTreeSet<StateVector> = embedded.iter().cloned().collect();
    let by_embedded = surrogate.label_all(&embedded_set)?;
    let labels: HashMap<&StateVector, bool> = unique
        .iter()
        .zip(&embedded)
        .map(|(x, e)| (x, by_embedded[e]))
        .collect();
    let classes = variant.component_classes();
    let mut table = SignatureTable::for_network(variant, Provenance::Estimated);
    for order in &orders {
        let ys: Vec<bool> = chain_vectors(order).map(|x| labels[&x]).collect();
        table.record_chain(classes, order, |i| ys[i]);
    }
    Ok(table)
}
