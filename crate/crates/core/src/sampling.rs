//! Truncated power laws, random rounding, and the degree and community-size
//! sequences built from them.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::Parameters;

/// Exponents closer to 1 than this use the logarithmic antiderivative.
const LOG_CASE_EPS: f64 = 1e-12;

/// A power law with the given exponent, discretized onto `lo..=hi` by
/// integrating `x^-exponent` over each unit interval `[k, k+1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerLawSpec {
    pub exponent: f64,
    pub lo: u32,
    pub hi: u32,
}

impl PowerLawSpec {
    pub fn new(exponent: f64, lo: u32, hi: u32) -> Result<Self> {
        let spec = PowerLawSpec { exponent, lo, hi };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.exponent > 0.0 && self.exponent.is_finite()) {
            return Err(Error::Domain(format!(
                "power-law exponent must be positive, got {}",
                self.exponent
            )));
        }
        if self.lo == 0 || self.hi < self.lo {
            return Err(Error::Domain(format!(
                "power-law support [{}, {}] must satisfy 1 <= lo <= hi",
                self.lo, self.hi
            )));
        }
        Ok(())
    }

    /// `int_x0^x1 t^-exponent dt` for `0 < x0 <= x1`.
    ///
    /// Written as `x0^c * expm1(c ln(x1/x0)) / c` with `c = 1 - exponent`, which
    /// stays accurate as `c` approaches zero and degrades to `ln(x1/x0)` there.
    fn mass(&self, x0: f64, x1: f64) -> f64 {
        let c = 1.0 - self.exponent;
        let log_ratio = (x1 / x0).ln();
        if c.abs() < LOG_CASE_EPS {
            log_ratio
        } else {
            x0.powf(c) * (c * log_ratio).exp_m1() / c
        }
    }

    fn total_mass(&self) -> f64 {
        self.mass(self.lo as f64, self.hi as f64 + 1.0)
    }

    /// Probability of `k`.
    pub fn pmf(&self, k: u32) -> Result<f64> {
        if k < self.lo || k > self.hi {
            return Err(Error::Domain(format!(
                "{k} lies outside the support [{}, {}]",
                self.lo, self.hi
            )));
        }
        Ok(self.mass(k as f64, k as f64 + 1.0) / self.total_mass())
    }

    /// Expected value, summed over the support.
    pub fn mean(&self) -> f64 {
        let total = self.total_mass();
        (self.lo..=self.hi)
            .map(|k| k as f64 * self.mass(k as f64, k as f64 + 1.0))
            .sum::<f64>()
            / total
    }

    pub fn sampler(&self) -> PowerLawSampler {
        PowerLawSampler::new(*self)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        self.sampler().sample(rng)
    }
}

/// Inverse-CDF sampler for a [`PowerLawSpec`].
///
/// The discrete law equals `floor(X)` for `X` with density proportional to
/// `x^-exponent` on `[lo, hi+1)`, so one continuous inversion per draw is exact.
#[derive(Clone, Copy, Debug)]
pub struct PowerLawSampler {
    spec: PowerLawSpec,
    /// `1 - exponent`, or 0 in the logarithmic case.
    c: f64,
    lo_pow: f64,
    hi_pow: f64,
}

impl PowerLawSampler {
    pub fn new(spec: PowerLawSpec) -> Self {
        let c = 1.0 - spec.exponent;
        let lo = spec.lo as f64;
        let hi = spec.hi as f64 + 1.0;
        if c.abs() < LOG_CASE_EPS {
            PowerLawSampler {
                spec,
                c: 0.0,
                lo_pow: lo.ln(),
                hi_pow: hi.ln(),
            }
        } else {
            PowerLawSampler {
                spec,
                c,
                lo_pow: lo.powf(c),
                hi_pow: hi.powf(c),
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        if self.spec.lo == self.spec.hi {
            return self.spec.lo;
        }
        let u: f64 = rng.random();
        let y = self.lo_pow + u * (self.hi_pow - self.lo_pow);
        let x = if self.c == 0.0 { y.exp() } else { y.powf(1.0 / self.c) };
        // Guard against rounding at the two ends of the support.
        (x.floor() as u32).clamp(self.spec.lo, self.spec.hi)
    }
}

/// Rounds `x >= 0` to `floor(x) + 1` with probability `frac(x)` and to
/// `floor(x)` otherwise, so the expectation is `x`.
pub fn random_round<R: Rng + ?Sized>(x: f64, rng: &mut R) -> u64 {
    debug_assert!(x >= 0.0);
    let base = x.floor();
    let frac = x - base;
    if frac > 0.0 && rng.random::<f64>() < frac {
        base as u64 + 1
    } else {
        base as u64
    }
}

/// Node degrees, sorted non-increasing, with an even sum.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeSequence(Vec<u32>);

impl DegreeSequence {
    /// Draws `n` i.i.d. degrees from the truncated power law `(gamma, delta, Delta)`.
    pub fn sample<R: Rng + ?Sized>(params: &Parameters, rng: &mut R) -> Result<Self> {
        let sampler = PowerLawSpec::new(params.gamma, params.delta, params.max_degree)?.sampler();
        let raw = (0..params.n).map(|_| sampler.sample(rng)).collect();
        Self::finish(raw, params.delta)
    }

    /// Accepts a user-supplied degree list; it goes through the same range
    /// checks and parity fix as a sampled one.
    pub fn from_explicit(degrees: Vec<u32>, params: &Parameters) -> Result<Self> {
        if degrees.len() != params.n {
            return Err(Error::param(
                "n",
                format!("explicit degree sequence has {} entries, expected {}", degrees.len(), params.n),
            ));
        }
        if let Some(&d) = degrees
            .iter()
            .find(|&&d| d < params.delta || d > params.max_degree)
        {
            return Err(Error::param(
                "delta",
                format!(
                    "explicit degree {d} lies outside [delta, Delta] = [{}, {}]",
                    params.delta, params.max_degree
                ),
            ));
        }
        Self::finish(degrees, params.delta)
    }

    fn finish(mut degrees: Vec<u32>, delta: u32) -> Result<Self> {
        degrees.sort_unstable_by(|a, b| b.cmp(a));
        let sum: u64 = degrees.iter().map(|&d| d as u64).sum();
        if sum % 2 == 1 {
            if degrees[0] <= delta {
                return Err(Error::param(
                    "delta",
                    "degree sum is odd and the largest degree equals delta, so it cannot be decreased",
                ));
            }
            degrees[0] -= 1;
            degrees.sort_unstable_by(|a, b| b.cmp(a));
        }
        Ok(DegreeSequence(degrees))
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.0.iter().map(|&d| d as u64).sum()
    }

    pub fn into_inner(self) -> Vec<u32> {
        self.0
    }
}

/// Primary community sizes and the sizes they grow to.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommunitySizes {
    /// Non-increasing, summing to the number of non-outliers.
    pub primary: Vec<u32>,
    /// `grown[j]` is `eta * primary[j]` randomly rounded.
    pub grown: Vec<u32>,
    /// Number of primary sizes pushed above `floor(S/eta)` by the overshoot
    /// adjustment.
    pub above_cap: usize,
}

impl CommunitySizes {
    pub fn count(&self) -> usize {
        self.primary.len()
    }

    pub fn sample<R: Rng + ?Sized>(params: &Parameters, rng: &mut R) -> Result<Self> {
        let n_hat = params.n_hat() as u64;
        let min = params.min_primary_size();
        let max = params.max_primary_size();
        if n_hat < min as u64 {
            return Err(Error::param(
                "s0",
                format!("n - s0 = {n_hat} is below the minimum primary size {min}"),
            ));
        }
        let sampler = PowerLawSpec::new(params.beta, min, max)?.sampler();
        let mut draws = Vec::new();
        let mut sum = 0u64;
        while sum < n_hat {
            let x = sampler.sample(rng);
            draws.push(x);
            sum += x as u64;
        }
        let primary = fit_to_total(draws, n_hat, min, rng);
        let above_cap = primary.iter().filter(|&&x| x > max).count();
        let grown = grow_sizes(&primary, params.eta, rng);
        Ok(CommunitySizes {
            primary,
            grown,
            above_cap,
        })
    }

    /// Accepts user-supplied primary sizes.
    pub fn from_primary<R: Rng + ?Sized>(
        mut primary: Vec<u32>,
        params: &Parameters,
        rng: &mut R,
    ) -> Result<Self> {
        let n_hat = params.n_hat() as u64;
        let total: u64 = primary.iter().map(|&x| x as u64).sum();
        if total != n_hat {
            return Err(Error::param(
                "s0",
                format!("explicit primary sizes sum to {total}, expected n - s0 = {n_hat}"),
            ));
        }
        let (min, max) = (params.min_primary_size(), params.max_primary_size());
        if let Some(&x) = primary.iter().find(|&&x| x < min || x > max) {
            return Err(Error::param(
                "s",
                format!("explicit primary size {x} lies outside [ceil(s/eta), floor(S/eta)] = [{min}, {max}]"),
            ));
        }
        primary.sort_unstable_by(|a, b| b.cmp(a));
        let grown = grow_sizes(&primary, params.eta, rng);
        Ok(CommunitySizes {
            primary,
            grown,
            above_cap: 0,
        })
    }
}

/// Trims an overshooting run of samples so it sums to exactly `target`.
///
/// `draws` must be the full run: every prefix but the whole sums to less than
/// `target`. If the last sample can absorb the overshoot `a` while staying at
/// least `min`, it is reduced by `a`. Otherwise it is dropped and its
/// remaining `c - a` units are handed out one each to uniformly chosen
/// earlier samples. The result is sorted non-increasing.
///
/// A single sample is always trimmed to `target`, even below `min`.
pub fn fit_to_total<R: Rng + ?Sized>(mut draws: Vec<u32>, target: u64, min: u32, rng: &mut R) -> Vec<u32> {
    let sum: u64 = draws.iter().map(|&x| x as u64).sum();
    debug_assert!(sum >= target);
    let overshoot = (sum - target) as u32;
    if overshoot > 0 {
        let last = draws.pop().expect("overshoot implies at least one draw");
        if last >= overshoot + min || draws.is_empty() {
            draws.push(last - overshoot);
        } else {
            // last > overshoot because the prefix sum was below target.
            let mut remaining = (last - overshoot) as usize;
            while remaining > 0 {
                let take = remaining.min(draws.len());
                for i in index::sample(rng, draws.len(), take) {
                    draws[i] += 1;
                }
                remaining -= take;
            }
        }
    }
    draws.sort_unstable_by(|a, b| b.cmp(a));
    draws
}

fn grow_sizes<R: Rng + ?Sized>(primary: &[u32], eta: f64, rng: &mut R) -> Vec<u32> {
    primary
        .iter()
        .map(|&x| random_round(eta * x as f64, rng) as u32)
        .collect()
}
