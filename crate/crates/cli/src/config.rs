use std::path::Path;

use abcdoo::Parameters;
use clap::Args;
use serde::Deserialize;

use crate::CliError;

/// Model parameters as given on the command line or in a TOML file; every
/// key is optional here so that flags can override the file.
#[derive(Args, Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamArgs {
    /// Number of nodes
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of outliers
    #[arg(long)]
    pub s0: Option<usize>,
    /// Average number of communities per non-outlier node
    #[arg(long)]
    pub eta: Option<f64>,
    /// Dimension of the reference layer
    #[arg(long)]
    pub d: Option<usize>,
    /// Target correlation between degree and number of communities
    #[arg(long, allow_negative_numbers = true)]
    pub rho: Option<f64>,
    /// Degree distribution exponent
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Minimum degree
    #[arg(long)]
    pub delta: Option<u32>,
    /// Maximum degree
    #[arg(long = "Delta")]
    #[serde(rename = "Delta")]
    pub max_degree: Option<u32>,
    /// Community size exponent
    #[arg(long)]
    pub beta: Option<f64>,
    /// Minimum community size
    #[arg(long = "s")]
    #[serde(rename = "s")]
    pub min_community: Option<u32>,
    /// Maximum community size
    #[arg(long = "S")]
    #[serde(rename = "S")]
    pub max_community: Option<u32>,
    /// Noise level
    #[arg(long)]
    pub xi: Option<f64>,
    /// Master seed [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
}

impl ParamArgs {
    pub fn from_toml_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        toml::from_str(&text).map_err(|e| CliError::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    /// Keys set in `other` win.
    pub fn overridden_by(self, other: ParamArgs) -> ParamArgs {
        ParamArgs {
            n: other.n.or(self.n),
            s0: other.s0.or(self.s0),
            eta: other.eta.or(self.eta),
            d: other.d.or(self.d),
            rho: other.rho.or(self.rho),
            gamma: other.gamma.or(self.gamma),
            delta: other.delta.or(self.delta),
            max_degree: other.max_degree.or(self.max_degree),
            beta: other.beta.or(self.beta),
            min_community: other.min_community.or(self.min_community),
            max_community: other.max_community.or(self.max_community),
            xi: other.xi.or(self.xi),
            seed: other.seed.or(self.seed),
        }
    }

    /// Complete, validated parameters.
    pub fn resolve(self) -> Result<Parameters, CliError> {
        fn need<T>(value: Option<T>, name: &'static str) -> Result<T, CliError> {
            value.ok_or(CliError::Missing(name))
        }
        let params = Parameters {
            n: need(self.n, "n")?,
            s0: need(self.s0, "s0")?,
            eta: need(self.eta, "eta")?,
            dim: need(self.d, "d")?,
            rho: need(self.rho, "rho")?,
            gamma: need(self.gamma, "gamma")?,
            delta: need(self.delta, "delta")?,
            max_degree: need(self.max_degree, "Delta")?,
            beta: need(self.beta, "beta")?,
            min_community: need(self.min_community, "s")?,
            max_community: need(self.max_community, "S")?,
            xi: need(self.xi, "xi")?,
            seed: self.seed.unwrap_or(0),
        };
        params.validate()?;
        Ok(params)
    }
}
