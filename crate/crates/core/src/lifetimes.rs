//! Component lifetime distributions, seeded sample pools and the node-to-edge
//! lifetime transformation.

use crate::net_model::{FailureMode, Network};
use crate::scalar::Scalar;
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Gamma, LogNormal, Weibull};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Lifetime law of one component class.
///
/// Exponential takes a rate (inverse scale); Weibull and Gamma take
/// `(scale, shape)`; Lognormal takes the location and scale of the
/// underlying normal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum LifetimeDistribution<T> {
    Exponential { rate: T },
    Weibull { scale: T, shape: T },
    Lognormal { location: T, scale: T },
    Gamma { scale: T, shape: T },
}

impl<T: Scalar> LifetimeDistribution<T> {
    pub fn exponential(rate: T) -> Result<Self> {
        Self::Exponential { rate }.checked()
    }

    pub fn weibull(scale: T, shape: T) -> Result<Self> {
        Self::Weibull { scale, shape }.checked()
    }

    pub fn lognormal(location: T, scale: T) -> Result<Self> {
        Self::Lognormal { location, scale }.checked()
    }

    pub fn gamma(scale: T, shape: T) -> Result<Self> {
        Self::Gamma { scale, shape }.checked()
    }

    /// Rejects non-positive or non-finite parameters.
    pub fn checked(self) -> Result<Self> {
        let positive = |name: &str, v: T| {
            if v.is_finite() && v > T::zero() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )))
            }
        };
        match self {
            Self::Exponential { rate } => positive("rate", rate)?,
            Self::Weibull { scale, shape } | Self::Gamma { scale, shape } => {
                positive("scale", scale)?;
                positive("shape", shape)?;
            }
            Self::Lognormal { location, scale } => {
                if !location.is_finite() {
                    return Err(Error::InvalidParameter("location must be finite".into()));
                }
                positive("scale", scale)?;
            }
        }
        Ok(self)
    }

    pub fn cdf(&self, t: T) -> Result<T> {
        if t < T::zero() || t.is_nan() {
            return Err(Error::NegativeTime(t.as_f64()));
        }
        if t.is_infinite() {
            return Ok(T::one());
        }
        let zero = T::zero();
        let value = match *self {
            Self::Exponential { rate } => -(-rate * t).exp_m1(),
            Self::Weibull { scale, shape } => -(-(t / scale).powf(shape)).exp_m1(),
            Self::Lognormal { location, scale } => {
                if t == zero {
                    zero
                } else {
                    let z = (t.as_f64().ln() - location.as_f64())
                        / (scale.as_f64() * std::f64::consts::SQRT_2);
                    T::of(0.5 * statrs::function::erf::erfc(-z))
                }
            }
            Self::Gamma { scale, shape } => {
                if t == zero {
                    zero
                } else {
                    T::of(statrs::function::gamma::gamma_lr(
                        shape.as_f64(),
                        (t / scale).as_f64(),
                    ))
                }
            }
        };
        Ok(value.max(zero).min(T::one()))
    }

    /// Draws one lifetime; always strictly positive and finite.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        // Parameters were checked at construction.
        const CHECKED: &str = "distribution parameters validated";
        let draw: f64 = match *self {
            Self::Exponential { rate } => Exp::new(rate.as_f64()).expect(CHECKED).sample(rng),
            Self::Weibull { scale, shape } => Weibull::new(scale.as_f64(), shape.as_f64())
                .expect(CHECKED)
                .sample(rng),
            Self::Lognormal { location, scale } => {
                LogNormal::new(location.as_f64(), scale.as_f64())
                    .expect(CHECKED)
                    .sample(rng)
            }
            Self::Gamma { scale, shape } => Gamma::new(shape.as_f64(), scale.as_f64())
                .expect(CHECKED)
                .sample(rng),
        };
        let value = T::of(draw);
        if value > T::zero() {
            value.min(T::max_value())
        } else {
            T::min_positive_value()
        }
    }

    /// Smallest `t` (to bisection precision) with `cdf(t) >= p`.
    pub fn quantile(&self, p: f64) -> T {
        let p = T::of(p);
        let below = |t: T| self.cdf(t).map(|c| c < p).unwrap_or(false);
        let mut hi = T::one();
        let mut steps = 0;
        while below(hi) && steps < 2000 {
            hi = hi + hi;
            steps += 1;
        }
        let mut lo = T::zero();
        for _ in 0..200 {
            let mid = (lo + hi) / T::of(2.0);
            if mid <= lo || mid >= hi {
                break;
            }
            if below(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }
}

/// One draw of per-component failure times, in canonical component order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LifetimeSample<T> {
    pub times: Vec<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplePool<T> {
    pub samples: Vec<LifetimeSample<T>>,
    pub seed: u64,
}

impl<T> SamplePool<T> {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Generates `n` independent lifetime samples.
///
/// Sample `j` is drawn from its own ChaCha stream `(seed, j)`, components in
/// canonical order, so the pool does not depend on the worker count.
pub fn sample_pool<T: Scalar>(
    net: &Network,
    dists: &[LifetimeDistribution<T>],
    n: usize,
    seed: u64,
) -> Result<SamplePool<T>> {
    if n == 0 {
        return Err(Error::InvalidConfig(
            "sample count must be at least 1".into(),
        ));
    }
    if let Some(s) = (0..net.n_classes()).find(|&s| s >= dists.len()) {
        return Err(Error::MissingDistribution(s + 1));
    }
    let classes = net.component_classes();
    let samples = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(j as u64);
            LifetimeSample {
                times: classes.iter().map(|&s| dists[s].sample(&mut rng)).collect(),
            }
        })
        .collect();
    Ok(SamplePool { samples, seed })
}

/// Edge lifetimes derived from node lifetimes.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeLifetimes<T> {
    pub times: Vec<T>,
    /// Class of the node that fixes each edge's lifetime; `None` for edges
    /// between two reliable nodes.
    pub classes: Vec<Option<usize>>,
    /// Node component that fixes each edge's lifetime.
    pub source: Vec<Option<usize>>,
}

/// Edge lifetime = shorter endpoint lifetime; class follows that endpoint.
///
/// Reliable endpoints count as living forever, so an edge between two
/// reliable nodes gets an infinite lifetime. Equal endpoint lifetimes resolve
/// to the lower-indexed node.
pub fn node_to_edge<T: Scalar>(
    net: &Network,
    sample: &LifetimeSample<T>,
) -> Result<EdgeLifetimes<T>> {
    if net.failure_mode() != FailureMode::NodeFailure {
        return Err(Error::FailureModeMismatch {
            expected: FailureMode::NodeFailure,
        });
    }
    if sample.times.len() != net.m() {
        return Err(Error::LengthMismatch {
            expected: net.m(),
            found: sample.times.len(),
        });
    }
    let node_time = |v: usize| net.element_component(v).map(|c| (sample.times[c], c));
    let n_e = net.n_edges();
    let mut out = EdgeLifetimes {
        times: Vec::with_capacity(n_e),
        classes: Vec::with_capacity(n_e),
        source: Vec::with_capacity(n_e),
    };
    for &(u, v) in net.edges() {
        let (a, b) = if u <= v { (u, v) } else { (v, u) };
        let pick = match (node_time(a), node_time(b)) {
            (None, None) => None,
            (Some(x), None) | (None, Some(x)) => Some(x),
            (Some(x), Some(y)) => Some(if y.0 < x.0 { y } else { x }),
        };
        match pick {
            Some((time, c)) => {
                out.times.push(time);
                out.classes.push(Some(net.class_of(c)));
                out.source.push(Some(c));
            }
            None => {
                out.times.push(T::infinity());
                out.classes.push(None);
                out.source.push(None);
            }
        }
    }
    Ok(out)
}
