//! Survival-signature tables, exact enumeration and reliability curves.
//!
//! A table counts survival and failure observations per combination key
//! `(l_1, ..., l_S)`. Its estimate `n_surv / (n_surv + n_fail)` is kept as an
//! exact ratio; exact tables therefore hold the survival signature without
//! rounding. Reliability at time `t` sums the signature against the product
//! of per-class binomial probabilities of having `l_s` class-`s` components
//! alive.

use crate::kst::{build_chain, DisjointSet, StateChain};
use crate::lifetimes::{LifetimeDistribution, SamplePool};
use crate::net_model::{CombinationKey, FailureMode, Network};
use crate::scalar::Scalar;
use crate::{Error, Result};
use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Exact signature value.
pub type ExactPhi = Ratio<u64>;

/// Default cap on `M` for exhaustive enumeration.
pub const DEFAULT_EXACT_LIMIT: usize = 26;

/// Relative errors are only reported where the reference reliability reaches this floor.
pub const RE_FLOOR: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Exact,
    Estimated,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "SignatureDoc", try_from = "SignatureDoc")]
pub struct SignatureTable {
    class_sizes: Vec<usize>,
    strides: Vec<usize>,
    n_surv: Vec<u64>,
    n_fail: Vec<u64>,
    fill: Vec<Option<ExactPhi>>,
    provenance: Provenance,
}

/// One printable row of a table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignatureRow {
    pub key: Vec<usize>,
    pub n_surv: u64,
    pub n_fail: u64,
    /// `None` for unvisited, unfilled combinations.
    pub phi_hat: Option<f64>,
    /// Envelope value for a combination no sample visited, as `num/den`.
    pub fill: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SignatureDoc {
    provenance: Provenance,
    class_sizes: Vec<usize>,
    rows: Vec<SignatureRow>,
}

impl From<SignatureTable> for SignatureDoc {
    fn from(t: SignatureTable) -> Self {
        Self {
            provenance: t.provenance,
            class_sizes: t.class_sizes.clone(),
            rows: t.rows(),
        }
    }
}

impl TryFrom<SignatureDoc> for SignatureTable {
    type Error = Error;

    fn try_from(doc: SignatureDoc) -> Result<Self> {
        let mut table = SignatureTable::new(&doc.class_sizes, doc.provenance);
        if doc.rows.len() != table.n_keys() {
            return Err(Error::Parse(format!(
                "expected {} signature rows, found {}",
                table.n_keys(),
                doc.rows.len()
            )));
        }
        for row in doc.rows {
            let idx = table.index_of(&CombinationKey(row.key))?;
            table.n_surv[idx] = row.n_surv;
            table.n_fail[idx] = row.n_fail;
            table.fill[idx] = row
                .fill
                .map(|f| {
                    f.parse()
                        .map_err(|_| Error::Parse(format!("bad ratio `{f}`")))
                })
                .transpose()?;
        }
        Ok(table)
    }
}

impl SignatureTable {
    pub fn new(class_sizes: &[usize], provenance: Provenance) -> Self {
        let mut strides = vec![1; class_sizes.len()];
        for s in (0..class_sizes.len().saturating_sub(1)).rev() {
            strides[s] = strides[s + 1] * (class_sizes[s + 1] + 1);
        }
        let n: usize = class_sizes.iter().map(|m| m + 1).product();
        Self {
            class_sizes: class_sizes.to_vec(),
            strides,
            n_surv: vec![0; n],
            n_fail: vec![0; n],
            fill: vec![None; n],
            provenance,
        }
    }

    pub fn for_network(net: &Network, provenance: Provenance) -> Self {
        Self::new(net.class_sizes(), provenance)
    }

    pub fn class_sizes(&self) -> &[usize] {
        &self.class_sizes
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn n_keys(&self) -> usize {
        self.n_surv.len()
    }

    /// Index of the all-working combination.
    pub fn top_index(&self) -> usize {
        self.n_keys() - 1
    }

    pub fn index_of(&self, key: &CombinationKey) -> Result<usize> {
        if key.0.len() != self.class_sizes.len() {
            return Err(Error::LengthMismatch {
                expected: self.class_sizes.len(),
                found: key.0.len(),
            });
        }
        let mut idx = 0;
        for (s, &l) in key.0.iter().enumerate() {
            if l > self.class_sizes[s] {
                return Err(Error::InvalidConfig(format!(
                    "class {} count {l} exceeds size {}",
                    s + 1,
                    self.class_sizes[s]
                )));
            }
            idx += l * self.strides[s];
        }
        Ok(idx)
    }

    pub fn key_of(&self, mut idx: usize) -> CombinationKey {
        let mut counts = Vec::with_capacity(self.class_sizes.len());
        for &stride in &self.strides {
            counts.push(idx / stride);
            idx %= stride;
        }
        CombinationKey(counts)
    }

    pub fn counts(&self, idx: usize) -> (u64, u64) {
        (self.n_surv[idx], self.n_fail[idx])
    }

    #[inline]
    pub fn record(&mut self, idx: usize, works: bool) {
        if works {
            self.n_surv[idx] += 1;
        } else {
            self.n_fail[idx] += 1;
        }
    }

    /// Records every state of a failure chain: `order` lists components by
    /// failure order and `works(i)` labels the state with `i` failures.
    pub fn record_chain(
        &mut self,
        classes: &[usize],
        order: &[usize],
        works: impl Fn(usize) -> bool,
    ) {
        let mut idx = self.top_index();
        for i in 0..=order.len() {
            self.record(idx, works(i));
            if i < order.len() {
                idx -= self.strides[classes[order[i]]];
            }
        }
    }

    pub fn merge(&mut self, other: &Self) {
        debug_assert_eq!(self.class_sizes, other.class_sizes);
        for (a, b) in self.n_surv.iter_mut().zip(&other.n_surv) {
            *a += b;
        }
        for (a, b) in self.n_fail.iter_mut().zip(&other.n_fail) {
            *a += b;
        }
    }

    pub fn total_observations(&self) -> u64 {
        self.n_surv.iter().chain(&self.n_fail).sum()
    }

    pub fn is_visited(&self, idx: usize) -> bool {
        self.n_surv[idx] + self.n_fail[idx] > 0
    }

    pub fn is_filled(&self, idx: usize) -> bool {
        !self.is_visited(idx) && self.fill[idx].is_some()
    }

    /// Signature value: the observed ratio, else the envelope fill, else `None`.
    pub fn phi(&self, idx: usize) -> Option<ExactPhi> {
        let n = self.n_surv[idx] + self.n_fail[idx];
        if n > 0 {
            Some(Ratio::new(self.n_surv[idx], n))
        } else {
            self.fill[idx]
        }
    }

    pub fn phi_hat<T: Scalar>(&self, idx: usize) -> Option<T> {
        self.phi(idx).map(|r| ratio_to(r))
    }

    pub fn unvisited_count(&self) -> usize {
        (0..self.n_keys()).filter(|&i| !self.is_visited(i)).count()
    }

    pub fn rows(&self) -> Vec<SignatureRow> {
        (0..self.n_keys())
            .map(|idx| SignatureRow {
                key: self.key_of(idx).0,
                n_surv: self.n_surv[idx],
                n_fail: self.n_fail[idx],
                phi_hat: self.phi_hat::<f64>(idx),
                fill: if self.is_visited(idx) {
                    None
                } else {
                    self.fill[idx].map(|r| r.to_string())
                },
            })
            .collect()
    }

    /// Fills unvisited combinations with the midpoint of their monotone envelope.
    ///
    /// The lower bound is the largest observed value among dominated visited
    /// combinations (0 if none); the upper bound is the smallest among
    /// dominating ones (1 if none).
    pub fn resolve_unvisited(&mut self) {
        let n = self.n_keys();
        let observed: Vec<Option<ExactPhi>> = (0..n)
            .map(|i| {
                let total = self.n_surv[i] + self.n_fail[i];
                (total > 0).then(|| Ratio::new(self.n_surv[i], total))
            })
            .collect();
        if observed.iter().all(Option::is_some) {
            return;
        }
        let zero = Ratio::zero();
        let one = Ratio::from_integer(1);
        let mut lower: Vec<Option<ExactPhi>> = vec![None; n];
        for idx in 0..n {
            let key = self.key_of(idx);
            let mut best = observed[idx];
            for (s, &l) in key.0.iter().enumerate() {
                if l > 0 {
                    best = best.max(lower[idx - self.strides[s]]);
                }
            }
            lower[idx] = best;
        }
        let mut upper: Vec<Option<ExactPhi>> = vec![None; n];
        for idx in (0..n).rev() {
            let key = self.key_of(idx);
            let mut best = observed[idx];
            for (s, &l) in key.0.iter().enumerate() {
                if l < self.class_sizes[s] {
                    if let Some(u) = upper[idx + self.strides[s]] {
                        best = Some(best.map_or(u, |b: ExactPhi| b.min(u)));
                    }
                }
            }
            upper[idx] = best;
        }
        for idx in 0..n {
            if observed[idx].is_none() {
                let lo = lower[idx].unwrap_or(zero);
                let hi = upper[idx].unwrap_or(one);
                self.fill[idx] = Some(midpoint(lo, hi));
            }
        }
    }

    /// Copy with unvisited combinations resolved.
    pub fn resolved(&self) -> Self {
        let mut t = self.clone();
        t.resolve_unvisited();
        t
    }
}

fn midpoint(a: ExactPhi, b: ExactPhi) -> ExactPhi {
    // (a/b + c/d) / 2 over u128 to avoid intermediate overflow.
    let (an, ad) = (*a.numer() as u128, *a.denom() as u128);
    let (bn, bd) = (*b.numer() as u128, *b.denom() as u128);
    let r = Ratio::new(an * bd + bn * ad, 2 * ad * bd);
    Ratio::new(
        u64::try_from(*r.numer()).unwrap_or(u64::MAX),
        u64::try_from(*r.denom()).unwrap_or(u64::MAX),
    )
}

fn ratio_to<T: Scalar>(r: ExactPhi) -> T {
    T::of(r.numer().to_f64().unwrap_or(0.0) / r.denom().to_f64().unwrap_or(1.0))
}

/// Tallies every state of every chain as a survival or failure observation.
pub fn accumulate<T: Scalar>(net: &Network, chains: &[StateChain<T>]) -> SignatureTable {
    let classes = net.component_classes();
    chains
        .par_chunks(1024)
        .map(|chunk| {
            let mut table = SignatureTable::for_network(net, Provenance::Estimated);
            for chain in chunk {
                table.record_chain(classes, &chain.sorted.order, |i| chain.phi(i));
            }
            table
        })
        .reduce(
            || SignatureTable::for_network(net, Provenance::Estimated),
            |mut a, b| {
                a.merge(&b);
                a
            },
        )
}

/// Monte Carlo signature estimate from one spanning-tree run per sample.
pub fn mc_kst<T: Scalar>(net: &Network, pool: &SamplePool<T>) -> Result<SignatureTable> {
    let chains = pool
        .samples
        .par_iter()
        .map(|s| build_chain(net, s))
        .collect::<Result<Vec<_>>>()?;
    Ok(accumulate(net, &chains))
}

/// Survival signature by evaluating the structure function on all `2^M` states.
pub fn exact_signature(net: &Network, limit: usize) -> Result<SignatureTable> {
    let m = net.m();
    if m > limit.min(63) {
        return Err(Error::ExactIntractable {
            components: m,
            limit: limit.min(63),
        });
    }
    let n_classes = net.n_classes();
    let mut class_masks = vec![0u64; n_classes];
    for i in 0..m {
        class_masks[net.class_of(i)] |= 1 << i;
    }
    let base = SignatureTable::for_network(net, Provenance::Exact);
    let strides = base.strides.clone();
    let total: u64 = 1 << m;
    let block = 1u64 << 12;
    let n_blocks = total.div_ceil(block);
    let mut table = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let mut part = SignatureTable::for_network(net, Provenance::Exact);
            let mut sets = DisjointSet::new(net.n_nodes());
            for mask in b * block..((b + 1) * block).min(total) {
                let idx: usize = class_masks
                    .iter()
                    .zip(&strides)
                    .map(|(cm, st)| (mask & cm).count_ones() as usize * st)
                    .sum();
                part.record(idx, works_under_mask(net, mask, &mut sets));
            }
            part
        })
        .reduce(
            || SignatureTable::for_network(net, Provenance::Exact),
            |mut a, b| {
                a.merge(&b);
                a
            },
        );
    table.provenance = Provenance::Exact;
    Ok(table)
}

/// Terminal connectivity of the working subgraph for a bitmask state.
fn works_under_mask(net: &Network, mask: u64, sets: &mut DisjointSet) -> bool {
    *sets = DisjointSet::new(net.n_nodes());
    let alive = |c: Option<usize>| c.is_none_or(|c| mask >> c & 1 == 1);
    for (e, &(u, v)) in net.edges().iter().enumerate() {
        let up = match net.failure_mode() {
            FailureMode::EdgeFailure => alive(net.element_component(e)),
            FailureMode::NodeFailure => {
                alive(net.element_component(u)) && alive(net.element_component(v))
            }
        };
        if up {
            sets.union(u, v);
        }
    }
    let terminals = net.terminals();
    let root = sets.find(terminals[0]);
    terminals[1..].iter().all(|&t| sets.find(t) == root)
}

/// Binomial probability of exactly `alive` survivors out of `n` with survival probability `p`.
fn binomial_pmf<T: Scalar>(n: usize, alive: usize, p: T) -> T {
    let q = T::one() - p;
    let dead = n - alive;
    if n <= 60 {
        let c = binomial_coefficient(n, alive);
        T::of(c) * p.powi(alive as i32) * q.powi(dead as i32)
    } else {
        if p.is_zero() || q.is_zero() {
            let certain = if p.is_zero() { alive == 0 } else { dead == 0 };
            return if certain { T::one() } else { T::zero() };
        }
        let ln_c = ln_binomial(n, alive);
        let mut ln = T::of(ln_c);
        if alive > 0 {
            ln = ln + T::of(alive as f64) * p.ln();
        }
        if dead > 0 {
            ln = ln + T::of(dead as f64) * q.ln();
        }
        ln.exp()
    }
}

fn binomial_coefficient(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    use statrs::function::gamma::ln_gamma;
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

fn class_cdfs<T: Scalar>(
    class_sizes: &[usize],
    dists: &[LifetimeDistribution<T>],
    t: T,
) -> Result<Vec<T>> {
    (0..class_sizes.len())
        .map(|s| {
            dists
                .get(s)
                .ok_or(Error::MissingDistribution(s + 1))
                .and_then(|d| d.cdf(t))
        })
        .collect()
}

/// Probability that exactly `key.0[s]` class-`s` components work at time `t`.
pub fn combination_probability<T: Scalar>(
    class_sizes: &[usize],
    dists: &[LifetimeDistribution<T>],
    key: &CombinationKey,
    t: T,
) -> Result<T> {
    if key.0.len() != class_sizes.len() {
        return Err(Error::LengthMismatch {
            expected: class_sizes.len(),
            found: key.0.len(),
        });
    }
    let cdfs = class_cdfs(class_sizes, dists, t)?;
    Ok(class_sizes
        .iter()
        .zip(&key.0)
        .zip(cdfs)
        .map(|((&m, &l), f)| binomial_pmf(m, l, T::one() - f))
        .fold(T::one(), |acc, p| acc * p))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityCurve<T> {
    pub grid: Vec<T>,
    pub values: Vec<T>,
}

/// Network reliability on `grid` by total probability over combinations.
///
/// Unvisited combinations are resolved by [`SignatureTable::resolve_unvisited`]
/// on a copy.
pub fn reliability<T: Scalar>(
    table: &SignatureTable,
    dists: &[LifetimeDistribution<T>],
    grid: &[T],
) -> Result<ReliabilityCurve<T>> {
    let owned;
    let table = if table.unvisited_count() > 0 {
        owned = table.resolved();
        &owned
    } else {
        table
    };
    let phi: Vec<T> = (0..table.n_keys())
        .map(|i| table.phi_hat(i).unwrap_or_else(T::zero))
        .collect();
    let sizes = table.class_sizes();
    let values = grid
        .par_iter()
        .map(|&t| {
            let cdfs = class_cdfs(sizes, dists, t)?;
            let pmfs: Vec<Vec<T>> = sizes
                .iter()
                .zip(&cdfs)
                .map(|(&m, &f)| (0..=m).map(|l| binomial_pmf(m, l, T::one() - f)).collect())
                .collect();
            let mut sum = T::zero();
            for (idx, &p) in phi.iter().enumerate() {
                if p.is_zero() {
                    continue;
                }
                let mut rest = idx;
                let mut weight = p;
                for (s, &stride) in table.strides.iter().enumerate() {
                    weight = weight * pmfs[s][rest / stride];
                    rest %= stride;
                }
                sum = sum + weight;
            }
            Ok(sum.min(T::one()).max(T::zero()))
        })
        .collect::<Result<Vec<T>>>()?;
    Ok(ReliabilityCurve {
        grid: grid.to_vec(),
        values,
    })
}

/// Uniform grid over `[0, t_max]` where `t_max` is the first time some
/// populated class reaches a 0.999 failure probability.
pub fn default_grid<T: Scalar>(
    class_sizes: &[usize],
    dists: &[LifetimeDistribution<T>],
    points: usize,
) -> Result<Vec<T>> {
    let mut t_max: Option<T> = None;
    for (s, &m) in class_sizes.iter().enumerate() {
        if m == 0 {
            continue;
        }
        let d = dists.get(s).ok_or(Error::MissingDistribution(s + 1))?;
        let q = d.quantile(0.999);
        t_max = Some(t_max.map_or(q, |cur: T| cur.min(q)));
    }
    Ok(uniform_grid(t_max.unwrap_or_else(T::one), points))
}

pub fn uniform_grid<T: Scalar>(t_max: T, points: usize) -> Vec<T> {
    match points {
        0 => Vec::new(),
        1 => vec![T::zero()],
        _ => (0..points)
            .map(|i| t_max * T::of(i as f64) / T::of((points - 1) as f64))
            .collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelativeError<T> {
    /// `|truth - approx| / truth` where `truth >= floor`, else `None`.
    pub per_point: Vec<Option<T>>,
    pub max: T,
}

pub fn relative_error<T: Scalar>(
    truth: &ReliabilityCurve<T>,
    approx: &ReliabilityCurve<T>,
    floor: T,
) -> Result<RelativeError<T>> {
    if truth.grid != approx.grid || truth.values.len() != approx.values.len() {
        return Err(Error::GridMismatch);
    }
    let per_point: Vec<Option<T>> = truth
        .values
        .iter()
        .zip(&approx.values)
        .map(|(&r, &a)| (r >= floor && r > T::zero()).then(|| (r - a).abs() / r))
        .collect();
    let max = per_point
        .iter()
        .flatten()
        .fold(T::zero(), |acc, &e| acc.max(e));
    Ok(RelativeError { per_point, max })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lifetimes::{sample_pool, LifetimeSample};
    use crate::net_model::fixtures::bridge;
    use crate::net_model::StateVector;

    fn exp1() -> Vec<LifetimeDistribution<f64>> {
        vec![LifetimeDistribution::exponential(1.0).unwrap()]
    }

    fn phis(t: &SignatureTable) -> Vec<f64> {
        (0..t.n_keys()).map(|i| t.phi_hat(i).unwrap()).collect()
    }

    #[test]
    fn ratio_arithmetic() {
        let mut t = SignatureTable::new(&[10], Provenance::Estimated);
        for k in 0..10 {
            t.record(3, k < 8);
        }
        assert_eq!(t.phi(3), Some(Ratio::new(4, 5)));
        assert_eq!(t.phi_hat::<f64>(3), Some(0.8));
        assert_eq!(t.phi(4), None);
    }

    #[test]
    fn bridge_exact() {
        let t = exact_signature(&bridge(), DEFAULT_EXACT_LIMIT).unwrap();
        assert_eq!(t.provenance(), Provenance::Exact);
        assert_eq!(phis(&t), [0.0, 0.0, 0.2, 0.8, 1.0, 1.0]);
        assert_eq!(t.phi(2), Some(Ratio::new(1, 5)));
    }

    #[test]
    fn series_exact() {
        let net = Network::edge_failure(3, &[(0, 1), (1, 2)], &[0, 2], vec![vec![0, 1]]).unwrap();
        let t = exact_signature(&net, DEFAULT_EXACT_LIMIT).unwrap();
        assert_eq!(phis(&t), [0.0, 0.0, 1.0]);
    }

    #[test]
    fn diamond_exact_matches_enumeration() {
        // s-a-t and s-b-t.
        let net = Network::edge_failure(
            4,
            &[(0, 1), (1, 3), (0, 2), (2, 3)],
            &[0, 3],
            vec![vec![0, 1, 2, 3]],
        )
        .unwrap();
        let t = exact_signature(&net, DEFAULT_EXACT_LIMIT).unwrap();
        // l=2: 2 working pairs out of 6; l=3: every triple keeps one path.
        assert_eq!(t.phi(2), Some(Ratio::new(1, 3)));
        assert_eq!(phis(&t), [0.0, 0.0, 1.0 / 3.0, 1.0, 1.0]);
    }

    #[test]
    fn exact_limit() {
        let err = exact_signature(&bridge(), 4).unwrap_err();
        assert!(matches!(
            err,
            Error::ExactIntractable {
                components: 5,
                limit: 4
            }
        ));
    }

    #[test]
    fn exact_agrees_with_bfs_structure_function() {
        let net = Network::node_failure(
            6,
            &[
                (0, 1),
                (0, 2),
                (1, 2),
                (1, 3),
                (2, 4),
                (3, 4),
                (3, 5),
                (4, 5),
            ],
            &[0, 5],
            vec![vec![1, 3], vec![2, 4]],
        )
        .unwrap();
        let t = exact_signature(&net, DEFAULT_EXACT_LIMIT).unwrap();
        let mut check = SignatureTable::for_network(&net, Provenance::Exact);
        for mask in 0..16u64 {
            let x = StateVector::from_mask(4, mask);
            let idx = check.index_of(&net.combination_of(&x).unwrap()).unwrap();
            check.record(idx, net.structure_function(&x).unwrap());
        }
        assert_eq!(t, check);
    }

    #[test]
    fn accumulate_counts_every_state() {
        let net = bridge();
        let pool = sample_pool(&net, &exp1(), 200, 3).unwrap();
        let chains: Vec<_> = pool
            .samples
            .iter()
            .map(|s| build_chain(&net, s).unwrap())
            .collect();
        let t = accumulate(&net, &chains);
        assert_eq!(t.total_observations(), 6 * 200);
        assert_eq!(t.unvisited_count(), 0);
        assert_eq!(t.phi_hat::<f64>(5), Some(1.0));
        assert_eq!(t.phi_hat::<f64>(0), Some(0.0));
    }

    #[test]
    fn bridge_mc_estimate() {
        let net = bridge();
        let pool = sample_pool(&net, &exp1(), 50_000, 11).unwrap();
        let chains: Vec<_> = pool
            .samples
            .iter()
            .map(|s| build_chain(&net, s).unwrap())
            .collect();
        let t = accumulate(&net, &chains);
        assert!((t.phi_hat::<f64>(2).unwrap() - 0.2).abs() < 0.02);
    }

    #[test]
    fn combination_probability_examples() {
        let d = vec![LifetimeDistribution::exponential(1.0).unwrap()];
        let half = 2f64.ln();
        let p = combination_probability(&[2], &d, &CombinationKey(vec![1]), half).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
        let sizes = [3, 2];
        let d2 = vec![d[0], LifetimeDistribution::weibull(1.7, 3.6).unwrap()];
        let table = SignatureTable::new(&sizes, Provenance::Exact);
        for idx in 0..table.n_keys() {
            let key = table.key_of(idx);
            let p0 = combination_probability(&sizes, &d2, &key, 0.0).unwrap();
            let expected = if idx == table.top_index() { 1.0 } else { 0.0 };
            assert_eq!(p0, expected);
        }
        for t in [0.1, 0.7, 2.0, 9.0] {
            let total: f64 = (0..table.n_keys())
                .map(|i| combination_probability(&sizes, &d2, &table.key_of(i), t).unwrap())
                .sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn large_class_uses_log_space() {
        let p = binomial_pmf::<f64>(100, 50, 0.5);
        // C(100,50)/2^100
        assert!((p - 0.079_589_237_387_178_78).abs() < 1e-12);
        let total: f64 = (0..=100).map(|l| binomial_pmf::<f64>(100, l, 0.3)).sum();
        assert!((total - 1.0).abs() < 1e-10);
        assert_eq!(binomial_pmf::<f64>(100, 100, 1.0), 1.0);
        assert_eq!(binomial_pmf::<f64>(100, 99, 1.0), 0.0);
    }

    #[test]
    fn series_reliability_is_product() {
        let net = Network::edge_failure(3, &[(0, 1), (1, 2)], &[0, 2], vec![vec![0, 1]]).unwrap();
        let t = exact_signature(&net, DEFAULT_EXACT_LIMIT).unwrap();
        let grid = [0.0, 2f64.ln(), 1.0];
        let curve = reliability(&t, &exp1(), &grid).unwrap();
        assert_eq!(curve.values[0], 1.0);
        assert!((curve.values[1] - 0.25).abs() < 1e-15);
        assert!((curve.values[2] - (-2.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn bridge_reliability_matches_state_enumeration() {
        let net = bridge();
        let t = exact_signature(&net, DEFAULT_EXACT_LIMIT).unwrap();
        let curve = reliability(&t, &exp1(), &[1.0]).unwrap();
        let p = (-1.0f64).exp();
        let mut direct = 0.0;
        for mask in 0..32u64 {
            let x = StateVector::from_mask(5, mask);
            if net.structure_function(&x).unwrap() {
                let k = mask.count_ones() as i32;
                direct += p.powi(k) * (1.0 - p).powi(5 - k);
            }
        }
        assert!((curve.values[0] - direct).abs() < 1e-14);
    }

    #[test]
    fn envelope_fill() {
        let mut t = SignatureTable::new(&[1, 1], Provenance::Estimated);
        // Keys: (0,0)=0, (0,1)=1, (1,0)=2, (1,1)=3.
        t.record(0, false);
        t.record(3, true);
        t.record(1, true);
        t.record(1, false);
        t.resolve_unvisited();
        assert!(t.is_filled(2));
        // Lower bound 0 from (0,0), upper bound 1 from (1,1).
        assert_eq!(t.phi(2), Some(Ratio::new(1, 2)));
        assert!(!t.is_filled(1));
        assert_eq!(t.phi(1), Some(Ratio::new(1, 2)));
    }

    #[test]
    fn envelope_respects_bounds() {
        let mut t = SignatureTable::new(&[2], Provenance::Estimated);
        t.record(0, false);
        for _ in 0..3 {
            t.record(2, true);
        }
        t.record(2, false);
        t.resolve_unvisited();
        // Midpoint of 0 and 3/4.
        assert_eq!(t.phi(1), Some(Ratio::new(3, 8)));
    }

    #[test]
    fn json_round_trip() {
        let mut t = SignatureTable::new(&[2, 1], Provenance::Estimated);
        t.record(0, false);
        t.record(5, true);
        t.resolve_unvisited();
        let text = serde_json::to_string(&t).unwrap();
        let back: SignatureTable = serde_json::from_str(&text).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn relative_error_examples() {
        let c = |v: Vec<f64>| ReliabilityCurve {
            grid: (0..v.len()).map(|i| i as f64).collect(),
            values: v,
        };
        let same = relative_error(&c(vec![1.0, 0.5]), &c(vec![1.0, 0.5]), RE_FLOOR).unwrap();
        assert_eq!(same.max, 0.0);
        let re = relative_error(&c(vec![1.0, 0.5]), &c(vec![1.0, 0.49858]), RE_FLOOR).unwrap();
        assert!((re.max - 0.002840).abs() < 1e-12);
        let floored = relative_error(&c(vec![1.0, 1e-4]), &c(vec![1.0, 5e-4]), RE_FLOOR).unwrap();
        assert_eq!(floored.per_point[1], None);
        assert_eq!(floored.max, 0.0);
        let other = ReliabilityCurve {
            grid: vec![0.0, 2.0],
            values: vec![1.0, 1.0],
        };
        assert!(matches!(
            relative_error(&c(vec![1.0, 1.0]), &other, RE_FLOOR),
            Err(Error::GridMismatch)
        ));
    }

    #[test]
    fn default_grid_reaches_quantile() {
        let d = exp1();
        let g = default_grid(&[3], &d, 256).unwrap();
        assert_eq!(g.len(), 256);
        assert_eq!(g[0], 0.0);
        let f = d[0].cdf(*g.last().unwrap()).unwrap();
        assert!((0.999..0.9991).contains(&f));
    }

    #[test]
    fn record_chain_matches_per_vector_keys() {
        let net = Network::edge_failure(
            4,
            &[(0, 1), (1, 2), (2, 3), (0, 3)],
            &[0, 2],
            vec![vec![0, 3], vec![1, 2]],
        )
        .unwrap();
        let s = LifetimeSample {
            times: vec![0.3, 0.1, 0.9, 0.5],
        };
        let chain = build_chain(&net, &s).unwrap();
        let mut fast = SignatureTable::for_network(&net, Provenance::Estimated);
        fast.record_chain(net.component_classes(), &chain.sorted.order, |i| {
            chain.phi(i)
        });
        let mut slow = SignatureTable::for_network(&net, Provenance::Estimated);
        for (i, v) in chain.vectors().enumerate() {
            slow.record(
                slow.index_of(&net.combination_of(&v).unwrap()).unwrap(),
                chain.phi(i),
            );
        }
        assert_eq!(fast, slow);
    }
}
