//! Run settings: command-line flags merged over an optional TOML file.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Every tunable of every command. Unset fields fall back to the config
/// file, then to per-command defaults.
///
/// `threads`, `out` and `config` do not influence results and are left out
/// of the configuration embedded in output files, so that reruns with a
/// different worker count or destination produce identical bytes.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// Master seed (required).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,

    /// Worker threads; never changes results.
    #[arg(long)]
    #[serde(skip_serializing)]
    pub threads: Option<usize>,

    /// Monte Carlo sample size.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,

    /// Comma-separated block sizes / sweep points.
    #[arg(long = "n-list", value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<u64>>,

    /// Replicates per block size.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reps: Option<u64>,

    /// Max-stable model H, e.g. "logistic(2, 2.0)".
    #[arg(long = "H")]
    #[serde(rename = "H", skip_serializing_if = "Option::is_none")]
    pub h: Option<String>,

    /// Model Q (any df with unit Fréchet margins).
    #[arg(long = "Q")]
    #[serde(rename = "Q", skip_serializing_if = "Option::is_none")]
    pub q: Option<String>,

    /// Df of the sample whose maxima are dominated.
    #[arg(long = "F")]
    #[serde(rename = "F", skip_serializing_if = "Option::is_none")]
    pub f: Option<String>,

    /// Df of the dominating vector.
    #[arg(long = "G")]
    #[serde(rename = "G", skip_serializing_if = "Option::is_none")]
    pub g: Option<String>,

    /// Estimator: spectral, direct, psi, self or quadrature.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x1: Option<f64>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x2: Option<f64>,

    /// Comma-separated finite-difference steps.
    #[arg(long = "h-list", value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_list: Option<Vec<f64>>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u: Option<f64>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,

    /// Dimension (exact-domination oracle, default models of `check subsets`).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,

    /// h0 or hinf (exact-domination oracle).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,

    #[arg(long = "abs-tol")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abs_tol: Option<f64>,

    #[arg(long = "max-subdivisions")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_subdivisions: Option<usize>,

    /// Draw sample maxima explicitly instead of by rescaling.
    #[arg(long = "brute-force", num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub brute_force: Option<bool>,

    /// Output file (stdout when absent).
    #[arg(long)]
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,

    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,

    /// TOML file with defaults for any of these settings.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident; $($field:ident),*) => {
        $( if $dst.$field.is_none() { $dst.$field = $src.$field; } )*
    };
}

impl Settings {
    /// Fills unset fields from `base`.
    pub fn or(mut self, base: Settings) -> Settings {
        overlay!(self, base; seed, threads, n, n_list, reps, h, q, f, g, method, x1, x2,
            h_list, u, t, d, family, abs_tol, max_subdivisions, brute_force, out, format);
        self
    }

    pub fn load(path: &Path) -> Result<Settings, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config file {}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("invalid config file {}: {e}", path.display()))
    }
}
