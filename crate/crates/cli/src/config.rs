//! JSON scenario schemas. Complex values are always split into `re`/`im`.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Decompose,
    Evolve,
    Verify,
    Sweep,
    Continuum,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Decompose => "decompose",
            Command::Evolve => "evolve",
            Command::Verify => "verify",
            Command::Sweep => "sweep",
            Command::Continuum => "continuum",
        }
    }

    pub fn default_output(self) -> &'static str {
        match self {
            Command::Decompose => "decompose.json",
            Command::Evolve => "evolve.csv",
            Command::Verify => "verify.json",
            Command::Sweep => "sweep.csv",
            Command::Continuum => "continuum.csv",
        }
    }
}

/// Row-major dense matrix `{"n": .., "re": [[..]], "im": [[..]]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixSpec {
    pub n: usize,
    pub re: Vec<Vec<f64>>,
    /// Zero when absent.
    pub im: Option<Vec<Vec<f64>>>,
}

/// Seeded random diagonalizable matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomMatrixSpec {
    pub n: usize,
    #[serde(default = "default_max_norm")]
    pub max_norm: f64,
    #[serde(default = "default_min_gap")]
    pub min_gap: f64,
    #[serde(default = "default_max_cond")]
    pub max_cond: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorSpec {
    pub re: Vec<f64>,
    pub im: Option<Vec<f64>>,
}

/// Exactly one of the three sources must be present.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixSource {
    pub matrix: Option<MatrixSpec>,
    pub matrix_file: Option<PathBuf>,
    pub random_matrix: Option<RandomMatrixSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecomposeConfig {
    #[serde(flatten)]
    pub source: MatrixSource,
    #[serde(default = "default_tol")]
    pub tol: f64,
    pub output: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    #[default]
    Rk4,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    #[serde(flatten)]
    pub source: MatrixSource,
    /// Random unit state from the seed when absent.
    pub psi0: Option<VectorSpec>,
    /// Modal constants; `|c_j(0)|^2` when absent.
    pub csq: Option<Vec<f64>>,
    #[serde(default = "default_hbar")]
    pub hbar: f64,
    #[serde(default)]
    pub method: Method,
    pub dt: f64,
    pub t_final: f64,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    pub output: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(flatten)]
    pub source: MatrixSource,
    pub psi0: Option<VectorSpec>,
    pub csq: Option<Vec<f64>>,
    #[serde(default = "default_hbar")]
    pub hbar: f64,
    #[serde(default = "default_fd_step")]
    pub fd_step: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    pub output: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterpolationSpec {
    #[default]
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathSpec {
    pub x0: f64,
    pub y0: f64,
    pub z0: f64,
    pub x1: f64,
    pub y1: f64,
    pub z1: f64,
    #[serde(default)]
    pub interpolation: InterpolationSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub path: PathSpec,
    #[serde(rename = "T")]
    pub duration: f64,
    pub dt: f64,
    pub csq: [f64; 2],
    #[serde(default = "default_hbar")]
    pub hbar: f64,
    #[serde(default = "default_sweep_record")]
    pub record_every: usize,
    #[serde(default = "default_true")]
    pub enforce_regime: bool,
    pub output: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    ComplexGaussian {
        amplitude_re: f64,
        amplitude_im: f64,
        center: f64,
        width: f64,
    },
    Table {
        re: Vec<f64>,
        #[serde(default)]
        im: Option<Vec<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialStateSpec {
    Gaussian {
        center: f64,
        width: f64,
        #[serde(default)]
        k0: f64,
    },
    PlaneWave {
        mode: i64,
    },
    Table {
        re: Vec<f64>,
        #[serde(default)]
        im: Option<Vec<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinuumScenario {
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "N")]
    pub points: usize,
    #[serde(default = "default_mass")]
    pub m: f64,
    #[serde(default = "default_hbar")]
    pub hbar: f64,
    pub potential: PotentialSpec,
    pub psi0: InitialStateSpec,
    pub dt: f64,
    pub t_final: f64,
    pub snapshot_every: usize,
    pub output: Option<String>,
}

/// Parsed parameters for one command.
#[derive(Debug, Clone, PartialEq)]
pub enum Params {
    Decompose(DecomposeConfig),
    Evolve(EvolveConfig),
    Verify(VerifyConfig),
    Sweep(SweepConfig),
    Continuum(ContinuumScenario),
}

impl Params {
    pub fn parse(command: Command, text: &str) -> Result<Self, serde_json::Error> {
        Ok(match command {
            Command::Decompose => Params::Decompose(serde_json::from_str(text)?),
            Command::Evolve => Params::Evolve(serde_json::from_str(text)?),
            Command::Verify => Params::Verify(serde_json::from_str(text)?),
            Command::Sweep => Params::Sweep(serde_json::from_str(text)?),
            Command::Continuum => Params::Continuum(serde_json::from_str(text)?),
        })
    }

    pub fn output(&self) -> Option<&str> {
        match self {
            Params::Decompose(c) => c.output.as_deref(),
            Params::Evolve(c) => c.output.as_deref(),
            Params::Verify(c) => c.output.as_deref(),
            Params::Sweep(c) => c.output.as_deref(),
            Params::Continuum(c) => c.output.as_deref(),
        }
    }
}

/// One scenario invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub command: Command,
    pub params: Params,
    pub out_dir: PathBuf,
    /// Directory that relative `matrix_file` paths resolve against.
    pub base_dir: PathBuf,
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn output_path(&self) -> PathBuf {
        self.out_dir
            .join(self.params.output().unwrap_or(self.command.default_output()))
    }
}

fn default_tol() -> f64 {
    biham::spectral::DEFAULT_TOL
}

fn default_hbar() -> f64 {
    biham::HBAR
}

fn default_mass() -> f64 {
    1.0
}

fn default_fd_step() -> f64 {
    biham::canonical::FD_STEP
}

fn default_record_every() -> usize {
    1
}

fn default_sweep_record() -> usize {
    10
}

fn default_true() -> bool {
    true
}

fn default_max_norm() -> f64 {
    1.0
}

fn default_min_gap() -> f64 {
    1e-3
}

fn default_max_cond() -> f64 {
    1e3
}
