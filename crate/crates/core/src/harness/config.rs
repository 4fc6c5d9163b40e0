use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::higgs_bundle::{catalog_spec, ManifoldSpec, ScenarioSpec};
use crate::summation::Summation;
use crate::variation_flow::{FlowParams, PathKind};

/// Environment variable that overrides the configured output directory.
pub const OUT_DIR_ENV: &str = "HIGGSFLOW_OUT_DIR";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Verify,
    Evaluate,
    Flow,
    Variation,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Verify => "verify",
            Command::Evaluate => "evaluate",
            Command::Flow => "flow",
            Command::Variation => "variation",
            Command::Sweep => "sweep",
        }
    }
}

/// One entry of the `scenarios` list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScenarioSource {
    /// Catalog name on the config's default manifold, e.g. `"TWISTED(2)"`.
    Name(String),
    /// Path to a scenario document, relative to the config file.
    File { file: PathBuf },
    /// Catalog name on its own manifold.
    Catalog { name: String, manifold: ManifoldSpec },
    Inline(Box<ScenarioSpec>),
}

/// Tolerances of the verification suite.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyTolerances {
    pub identity: f64,
    pub hermitian: f64,
    pub algebraic: f64,
    pub variation: f64,
    pub adjoint_variation: f64,
    pub el_halves: f64,
    pub n1_remark: f64,
}

impl Default for VerifyTolerances {
    fn default() -> Self {
        VerifyTolerances {
            identity: 1e-8,
            hermitian: 1e-10,
            algebraic: 1e-12,
            variation: 1e-5,
            adjoint_variation: 1e-6,
            el_halves: 1e-10,
            n1_remark: 1e-10,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VariationConfig {
    pub directions: usize,
    pub amplitude: f64,
    pub modes: usize,
    pub path: PathKind,
    /// Pass threshold on the relative error for the `variation` command.
    pub tolerance: f64,
}

impl Default for VariationConfig {
    fn default() -> Self {
        VariationConfig {
            directions: 3,
            amplitude: 0.5,
            modes: 1,
            path: PathKind::Linear,
            tolerance: 1e-4,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// Seeds to evaluate each scenario at; empty means the run seed only.
    pub seeds: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Optional; must agree with the command line when given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    pub scenarios: Vec<ScenarioSource>,
    #[serde(default = "default_manifold")]
    pub manifold: ManifoldSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub summation: Summation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub tolerances: VerifyTolerances,
    #[serde(default)]
    pub flow: FlowParams,
    #[serde(default)]
    pub variation: VariationConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    /// Directory that relative scenario files are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_manifold() -> ManifoldSpec {
    ManifoldSpec::unit(1, 32)
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        if cfg.scenarios.is_empty() {
            return Err(Error::InvalidInput("config lists no scenarios".into()));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    /// The command to run, given the one named on the command line.
    pub fn resolve_command(&self, cli: Command) -> Result<Command> {
        match self.command {
            Some(c) if c != cli => Err(Error::InvalidInput(format!(
                "config is for `{}` but `{}` was requested",
                c.name(),
                cli.name()
            ))),
            _ => Ok(cli),
        }
    }

    /// Resolves every scenario entry to a document.
    pub fn scenario_specs(&self) -> Result<Vec<ScenarioSpec>> {
        self.scenarios
            .iter()
            .map(|src| match src {
                ScenarioSource::Name(name) => catalog_spec(name, &self.manifold),
                ScenarioSource::Catalog { name, manifold } => catalog_spec(name, manifold),
                ScenarioSource::Inline(spec) => Ok((**spec).clone()),
                ScenarioSource::File { file } => {
                    let path = self.base_dir.join(file);
                    let text = std::fs::read_to_string(&path)
                        .map_err(|e| Error::InvalidInput(format!("cannot read scenario {}: {e}", path.display())))?;
                    Ok(serde_json::from_str(&text)?)
                }
            })
            .collect()
    }

    /// `--out` beats the environment, which beats the config file.
    pub fn output_dir(&self, cli: Option<&Path>) -> PathBuf {
        if let Some(p) = cli {
            return p.to_path_buf();
        }
        if let Some(p) = std::env::var_os(OUT_DIR_ENV) {
            return PathBuf::from(p);
        }
        match &self.output_dir {
            Some(p) if p.is_relative() => self.base_dir.join(p),
            Some(p) => p.clone(),
            None => PathBuf::from("higgsflow-out"),
        }
    }
}
