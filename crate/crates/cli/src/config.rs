use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use blockenc::linalg::{self, CMatrix, CVector};
use blockenc::matrix_io;

pub const DEFAULT_SEED: u64 = 42;

/// Failures that terminate a run, split by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    ConfigParse(String),
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),
    #[error("{}: {msg}", path.display())]
    Input { path: PathBuf, msg: String },
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Numeric(#[from] blockenc::Error),
    #[error("writing {}: {msg}", path.display())]
    Io { path: PathBuf, msg: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numeric(_) => 3,
            _ => 2,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Pipeline {
    PcaPower,
    PcaGd,
    Solve,
    SimulateDirect,
    SimulateOde,
    GroundState,
    Energies,
    Fit,
    Costs,
}

impl fmt::Display for Pipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = serde_json::to_value(self).expect("pipeline names serialize");
        f.write_str(v.as_str().expect("unit variant"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Normalize {
    Frobenius,
    Operator,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub pipeline: Pipeline,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vector: Option<PathBuf>,
    #[serde(default)]
    pub parameters: BTreeMap<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

impl ExperimentConfig {
    pub fn empty(pipeline: Pipeline) -> Self {
        Self {
            pipeline,
            matrix: None,
            dataset: None,
            vector: None,
            parameters: BTreeMap::new(),
            output: None,
            format: Format::Json,
        }
    }

    /// Reads a JSON config; relative input paths resolve against its directory.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = read_text(path)?;
        let mut cfg: Self = serde_json::from_str(&text).map_err(|e| CliError::ConfigParse(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.matrix, &mut cfg.dataset, &mut cfg.vector].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if let Some(Value::String(hint)) = cfg.parameters.get_mut("partition-hint") {
            let p = Path::new(hint.as_str());
            if p.is_relative() {
                *hint = base.join(p).to_string_lossy().into_owned();
            }
        }
        Ok(cfg)
    }

    pub fn seed(&self) -> CliResult<u64> {
        match self.parameters.get("seed") {
            None => Ok(DEFAULT_SEED),
            Some(v) => v
                .as_u64()
                .ok_or_else(|| CliError::Validation(format!("seed must be a non-negative integer, got {v}"))),
        }
    }

    /// Fills the seed so the echoed config always carries it.
    pub fn with_seed(mut self) -> CliResult<Self> {
        let seed = self.seed()?;
        self.parameters.insert("seed".into(), Value::from(seed));
        Ok(self)
    }

    pub fn number(&self, key: &str) -> CliResult<Option<f64>> {
        match self.parameters.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(v) => v
                .as_f64()
                .map(Some)
                .ok_or_else(|| CliError::Validation(format!("parameter `{key}` must be a number, got {v}"))),
        }
    }

    pub fn number_or(&self, key: &str, default: f64) -> CliResult<f64> {
        Ok(self.number(key)?.unwrap_or(default))
    }

    pub fn count(&self, key: &str) -> CliResult<Option<usize>> {
        match self.number(key)? {
            None => Ok(None),
            Some(v) if v >= 0.0 && v.fract() == 0.0 => Ok(Some(v as usize)),
            Some(v) => Err(CliError::Validation(format!(
                "parameter `{key}` must be a non-negative integer, got {v}"
            ))),
        }
    }

    pub fn text(&self, key: &str) -> CliResult<Option<String>> {
        match self.parameters.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(v) => Err(CliError::Validation(format!("parameter `{key}` must be a string, got {v}"))),
        }
    }

    /// `eps` with its default, checked to lie in `(0, 1)`.
    pub fn eps(&self, default: f64) -> CliResult<f64> {
        let eps = self.number_or("eps", default)?;
        if !(eps > 0.0 && eps < 1.0) {
            return Err(CliError::Validation(format!("eps must lie in (0, 1), got {eps}")));
        }
        Ok(eps)
    }

    pub fn normalize(&self) -> CliResult<Option<Normalize>> {
        match self.text("normalize")? {
            None => Ok(None),
            Some(s) => serde_json::from_value(Value::String(s.clone()))
                .map(Some)
                .map_err(|_| CliError::Validation(format!("unknown normalization `{s}`"))),
        }
    }

    /// Contents of the `partition-hint` file, a single integer.
    pub fn partition_hint(&self) -> CliResult<Option<usize>> {
        let Some(path) = self.text("partition-hint")? else {
            return Ok(None);
        };
        let path = PathBuf::from(path);
        let text = read_text(&path)?;
        text.trim().parse().map(Some).map_err(|_| CliError::Input {
            path,
            msg: "expected a single non-negative integer".into(),
        })
    }
}

pub fn read_text(path: &Path) -> CliResult<String> {
    if !path.exists() {
        return Err(CliError::FileNotFound(path.to_path_buf()));
    }
    std::fs::read_to_string(path).map_err(|e| CliError::Input {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })
}

fn input_error(path: &Path) -> impl Fn(blockenc::Error) -> CliError + '_ {
    move |e| CliError::Input {
        path: path.to_path_buf(),
        msg: e.to_string(),
    }
}

pub fn load_matrix(path: &Path) -> CliResult<CMatrix> {
    let m = matrix_io::parse_matrix(&read_text(path)?).map_err(input_error(path))?;
    linalg::ensure_finite(&m).map_err(input_error(path))?;
    Ok(m)
}

pub fn load_vector(path: &Path) -> CliResult<CVector> {
    matrix_io::parse_vector(&read_text(path)?).map_err(input_error(path))
}

pub fn required<'a>(slot: &'a Option<PathBuf>, what: &str, pipeline: Pipeline) -> CliResult<&'a Path> {
    slot.as_deref()
        .ok_or_else(|| CliError::Validation(format!("{pipeline} needs a `{what}` input")))
}
