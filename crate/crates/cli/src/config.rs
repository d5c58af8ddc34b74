use std::path::{Path, PathBuf};

use ctlab_core::analysis::{Budgets, Toggles};
use ctlab_core::catalog::CatalogConfig;
use ctlab_core::classify::{Observable, ScalingModel, DEFAULT_LAMBDA_GRID, DEFAULT_THRESHOLD};
use ctlab_core::ensembles::{Family, FamilySpec};
use ctlab_core::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Gen,
    Analyze,
    Classify,
    Catalog,
}

/// A family at one size; the seed falls back to one derived from the master
/// seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyConfig {
    #[serde(flatten)]
    pub family: Family,
    #[serde(default)]
    pub size: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    pub model: ScalingModel,
    pub observable: Observable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyConfig {
    pub sizes: Vec<usize>,
    pub samples: usize,
    pub geometry: bool,
    pub lambda_grid: Vec<f64>,
    pub threshold: f64,
    pub fits: Vec<FitConfig>,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self {
            sizes: Vec::new(),
            samples: 10,
            geometry: false,
            lambda_grid: DEFAULT_LAMBDA_GRID.to_vec(),
            threshold: DEFAULT_THRESHOLD,
            fits: vec![FitConfig { model: ScalingModel::PowerInN, observable: Observable::TCov }],
        }
    }
}

/// The JSON document passed with `--config`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Optional; must agree with the subcommand when present.
    #[serde(default)]
    pub command: Option<Command>,
    #[serde(default)]
    pub family: Option<FamilyConfig>,
    /// Graph file in the edge-list format, an alternative to `family` for
    /// `analyze`. Relative paths resolve against the config file.
    #[serde(default)]
    pub graph: Option<PathBuf>,
    #[serde(default)]
    pub toggles: Toggles,
    #[serde(default)]
    pub budgets: Budgets,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub classify: ClassifyConfig,
    #[serde(default)]
    pub catalog: CatalogConfig,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidParameters(format!("cannot read config {}: {e}", path.display())))?;
        let mut config: RunConfig = serde_json::from_str(&text)
            .map_err(|e| Error::InvalidParameters(format!("config {}: {e}", path.display())))?;
        if let Some(g) = &config.graph {
            if g.is_relative() {
                let base = path.parent().unwrap_or(Path::new("."));
                config.graph = Some(base.join(g));
            }
        }
        Ok(config)
    }

    /// Checks that do not depend on running anything.
    pub fn validate(&self, command: Command) -> Result<()> {
        if let Some(c) = self.command {
            if c != command {
                return Err(Error::InvalidParameters(format!("config is for {c:?}, invoked as {command:?}")));
            }
        }
        self.budgets.validate()?;
        match command {
            Command::Gen => {
                self.family_spec()?;
            }
            Command::Analyze => {
                match (&self.family, &self.graph) {
                    (Some(_), None) => {
                        self.family_spec()?;
                    }
                    (None, Some(path)) => {
                        if !path.is_file() {
                            return Err(Error::InvalidParameters(format!("graph file {} not found", path.display())));
                        }
                    }
                    _ => return Err(Error::InvalidParameters("analyze needs exactly one of family or graph".into())),
                }
                if self.toggles.is_stochastic() && self.seed.is_none() {
                    return Err(Error::InvalidParameters(
                        "seed is required when cover_mc or gff is enabled".into(),
                    ));
                }
            }
            Command::Classify => {
                let family = self
                    .family
                    .as_ref()
                    .ok_or_else(|| Error::InvalidParameters("classify needs a family".into()))?;
                family.family.validate()?;
                if self.seed.is_none() {
                    return Err(Error::InvalidParameters("classify needs a master seed".into()));
                }
                if self.classify.sizes.is_empty() || self.classify.samples == 0 {
                    return Err(Error::InvalidParameters("classify needs sizes and a positive sample count".into()));
                }
            }
            Command::Catalog => self.catalog_config().validate()?,
        }
        Ok(())
    }

    pub fn family_spec(&self) -> Result<FamilySpec> {
        let f = self.family.as_ref().ok_or_else(|| Error::InvalidParameters("config has no family".into()))?;
        f.family.validate()?;
        let size = f.size.ok_or_else(|| Error::InvalidParameters("family needs a size".into()))?;
        let seed = match (f.seed, self.seed) {
            (Some(s), _) => s,
            (None, Some(master)) => ctlab_core::rng::derive_seed(master, &[0]),
            (None, None) if !f.family.is_random() => 0,
            (None, None) => {
                return Err(Error::InvalidParameters(format!("random family {} needs a seed", f.family.name())))
            }
        };
        Ok(FamilySpec::new(f.family.clone(), size, seed))
    }

    /// Catalog settings, with the top-level seed as master seed when given.
    pub fn catalog_config(&self) -> CatalogConfig {
        let mut c = self.catalog.clone();
        if let Some(s) = self.seed {
            c.master_seed = s;
        }
        c
    }
}
