//! Experiment configuration: TOML with sections, overridden by flags.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use susy_eta::grid::HalfLineGrid;
use susy_eta::spectral::KGrid;
use susy_eta::transformation::{catalogue, CatalogueParams};
use susy_eta::verify::Tolerances;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub d: f64,
    pub b: f64,
    #[serde(default = "one")]
    pub a: f64,
    #[serde(default = "one")]
    pub c: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n: usize,
    pub x_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSection {
    pub d_sequence: Vec<f64>,
}

impl Default for ProbeSection {
    fn default() -> Self {
        ProbeSection {
            d_sequence: vec![-1.0, -0.5, -0.25, -0.1],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            directory: PathBuf::from("out"),
            formats: vec![Format::Json],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteSection {
    #[serde(default = "default_true")]
    pub matrix: bool,
    #[serde(default)]
    pub rho_spectral: bool,
    #[serde(default = "default_tests")]
    pub n_tests: usize,
}

fn default_true() -> bool {
    true
}

fn default_tests() -> usize {
    20
}

impl Default for SuiteSection {
    fn default() -> Self {
        SuiteSection {
            matrix: true,
            rho_spectral: false,
            n_tests: 20,
        }
    }
}

/// k-grid used for eigenstate tables and the spectral-integral check.
pub fn default_k_grid() -> KGrid {
    KGrid {
        k_min: 0.5,
        k_max: 5.0,
        n_k: 10,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub entry: String,
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub params: Params,
    pub grid: GridSection,
    #[serde(default = "default_k_grid")]
    pub k_grid: KGrid,
    #[serde(default)]
    pub probe: ProbeSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub suite: SuiteSection,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn default_seed() -> u64 {
    7
}

impl ExperimentConfig {
    /// Built-in settings for a catalogue example.
    pub fn example(entry: &str) -> Self {
        ExperimentConfig {
            entry: entry.to_string(),
            seed: default_seed(),
            params: Params {
                d: -1.0,
                b: 1.0,
                a: 1.0,
                c: 1.0,
            },
            grid: GridSection { n: 401, x_max: 20.0 },
            k_grid: default_k_grid(),
            probe: ProbeSection::default(),
            output: OutputSection::default(),
            suite: SuiteSection::default(),
            tolerances: Tolerances::default(),
        }
    }

    pub fn from_toml(text: &str, path: &Path) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text, path)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = o.d {
            self.params.d = v;
        }
        if let Some(v) = o.b {
            self.params.b = v;
        }
        if let Some(v) = o.a {
            self.params.a = v;
        }
        if let Some(v) = o.c {
            self.params.c = v;
        }
        if let Some(v) = o.n {
            self.grid.n = v;
        }
        if let Some(v) = o.xmax {
            self.grid.x_max = v;
        }
        if let Some(v) = o.kmin {
            self.k_grid.k_min = v;
        }
        if let Some(v) = o.kmax {
            self.k_grid.k_max = v;
        }
        if let Some(v) = o.nk {
            self.k_grid.n_k = v;
        }
        if let Some(v) = &o.out {
            self.output.directory = v.clone();
        }
        if let Some(v) = o.format {
            self.output.formats = vec![v];
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
    }

    pub fn catalogue_params(&self) -> CatalogueParams {
        CatalogueParams {
            d: self.params.d,
            b: self.params.b,
            a: self.params.a,
            c: self.params.c,
        }
    }

    /// Run every guard of the library on the settings.
    pub fn validate(&self) -> Result<Arc<HalfLineGrid>, ConfigError> {
        let bad = |e: susy_eta::Error| ConfigError::Invalid(e.to_string());
        catalogue(&self.entry, self.catalogue_params()).map_err(bad)?;
        self.k_grid.validate().map_err(bad)?;
        if self.output.formats.is_empty() {
            return Err(ConfigError::Invalid("output.formats is empty".into()));
        }
        let grid = HalfLineGrid::new(self.grid.x_max, self.grid.n).map_err(bad)?;
        Ok(Arc::new(grid))
    }

    pub fn suite(&self) -> susy_eta::verify::SuiteConfig {
        susy_eta::verify::SuiteConfig {
            seed: self.seed,
            n_tests: self.suite.n_tests,
            matrix: self.suite.matrix,
            rho_spectral: self.suite.rho_spectral,
            k_grid: self.k_grid,
            tolerances: self.tolerances,
        }
    }
}

/// Flag values that replace config keys.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    #[arg(long, allow_hyphen_values = true)]
    pub d: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub xmax: Option<f64>,
    #[arg(long)]
    pub kmin: Option<f64>,
    #[arg(long)]
    pub kmax: Option<f64>,
    #[arg(long)]
    pub nk: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub seed: Option<u64>,
}
