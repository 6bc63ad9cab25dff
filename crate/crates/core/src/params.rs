use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Model parameters. Field names follow the command-line flags
/// (`d`, `Delta`, `s` and `S` in their serialized form).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Parameters {
    /// Number of nodes.
    pub n: usize,
    /// Number of outliers.
    pub s0: usize,
    /// Mean number of communities per non-outlier.
    pub eta: f64,
    /// Dimension of the reference layer.
    #[serde(rename = "d")]
    pub dim: usize,
    /// Target Pearson correlation between degree and membership count.
    pub rho: f64,
    /// Degree exponent.
    pub gamma: f64,
    /// Minimum degree.
    pub delta: u32,
    /// Maximum degree.
    #[serde(rename = "Delta")]
    pub max_degree: u32,
    /// Community size exponent.
    pub beta: f64,
    /// Minimum community size.
    #[serde(rename = "s")]
    pub min_community: u32,
    /// Maximum community size.
    #[serde(rename = "S")]
    pub max_community: u32,
    /// Noise level.
    pub xi: f64,
    #[serde(default)]
    pub seed: u64,
}

impl Parameters {
    /// Number of non-outliers.
    pub fn n_hat(&self) -> usize {
        self.n.saturating_sub(self.s0)
    }

    /// Smallest admissible primary community size, `ceil(s / eta)`.
    pub fn min_primary_size(&self) -> u32 {
        (self.min_community as f64 / self.eta).ceil() as u32
    }

    /// Largest admissible primary community size, `floor(S / eta)`.
    pub fn max_primary_size(&self) -> u32 {
        (self.max_community as f64 / self.eta).floor() as u32
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::param("n", "must be a positive integer"));
        }
        if self.s0 > self.n {
            return Err(Error::param("s0", format!("must lie in [0, n] = [0, {}]", self.n)));
        }
        if !(self.eta >= 1.0 && self.eta.is_finite()) {
            return Err(Error::param("eta", "must lie in [1, inf)"));
        }
        if self.dim == 0 {
            return Err(Error::param("d", "must be a positive integer"));
        }
        if !(-1.0..=1.0).contains(&self.rho) {
            return Err(Error::param("rho", "must lie in [-1, 1]"));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::param("gamma", "must be a positive real"));
        }
        if self.delta == 0 {
            return Err(Error::param("delta", "must be a positive integer"));
        }
        if self.max_degree < self.delta {
            return Err(Error::param(
                "Delta",
                format!("must lie in {{delta, delta+1, ...}} = {{{}, ...}}", self.delta),
            ));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::param("beta", "must be a positive real"));
        }
        if self.min_community < self.delta + 1 {
            return Err(Error::param(
                "s",
                format!(
                    "must lie in {{delta+1, delta+2, ...}} = {{{}, ...}}",
                    self.delta + 1
                ),
            ));
        }
        if self.max_community < self.min_community {
            return Err(Error::param(
                "S",
                format!("must lie in {{s, s+1, ...}} = {{{}, ...}}", self.min_community),
            ));
        }
        if !(0.0..=1.0).contains(&self.xi) {
            return Err(Error::param("xi", "must lie in [0, 1]"));
        }
        if self.min_primary_size() > self.max_primary_size() {
            return Err(Error::param(
                "S",
                format!(
                    "primary size range [ceil(s/eta), floor(S/eta)] = [{}, {}] is empty",
                    self.min_primary_size(),
                    self.max_primary_size()
                ),
            ));
        }
        if self.n_hat() < self.min_primary_size() as usize {
            return Err(Error::param(
                "s0",
                format!(
                    "n - s0 = {} non-outliers cannot fill a primary community of size {}",
                    self.n_hat(),
                    self.min_primary_size()
                ),
            ));
        }
        Ok(())
    }

    /// Parameters fitted to the DBLP co-authorship network.
    pub fn dblp(dim: usize, seed: u64) -> Self {
        Parameters {
            n: 317_080,
            s0: 56_082,
            eta: 2.76,
            dim,
            rho: 0.76,
            gamma: 2.30,
            delta: 5,
            max_degree: 343,
            beta: 1.88,
            min_community: 10,
            max_community: 7_556,
            xi: 0.11,
            seed,
        }
    }

    /// Parameters fitted to the Amazon co-purchasing network.
    pub fn amazon(dim: usize, seed: u64) -> Self {
        Parameters {
            n: 334_863,
            s0: 17_669,
            eta: 7.16,
            dim,
            rho: 0.22,
            gamma: 3.04,
            delta: 5,
            max_degree: 549,
            beta: 2.03,
            min_community: 10,
            max_community: 53_551,
            xi: 0.11,
            seed,
        }
    }

    /// Parameters fitted to the non-outlier part of the YouTube network.
    pub fn youtube(dim: usize, seed: u64) -> Self {
        Parameters {
            n: 52_675,
            s0: 0,
            eta: 2.45,
            dim,
            rho: 0.37,
            gamma: 1.87,
            delta: 5,
            max_degree: 1_928,
            beta: 2.13,
            min_community: 10,
            max_community: 3_001,
            xi: 0.59,
            seed,
        }
    }
}
