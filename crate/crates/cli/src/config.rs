use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use lcp_core::annotations::{read_labels, read_release_dir, read_released, ReleasedEntry};
use lcp_core::corpus::read_instances;
use lcp_core::eval::{AblationSet, Dataset, ForestTrainer, RegressionTrainer, Trainer};
use lcp_core::features::{FeatureMatrix, Featurizer};
use lcp_core::models::ForestParams;
use lcp_core::resources::{EmbeddingTable, Lexicon, LexiconSources};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::manifest::RunManifest;

pub const DEFAULT_RIDGE_LAMBDA: f64 = 1.0;

/// Reads a TOML config, or the type's default when no path is given.
pub fn load_config<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    toml::from_str(&text).map_err(|e| crate::validation(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResourcesConfig {
    pub tables: Vec<PathBuf>,
    pub frequent_list: Option<PathBuf>,
    pub archaic_list: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
}

pub struct Resources {
    pub lexicon: Lexicon,
    pub embeddings: Option<EmbeddingTable>,
}

impl Resources {
    pub fn featurizer(&self) -> Featurizer<'_> {
        Featurizer::new(&self.lexicon, self.embeddings.as_ref())
    }
}

impl ResourcesConfig {
    pub fn load(&self, manifest: &mut RunManifest) -> Result<Resources> {
        for p in self
            .tables
            .iter()
            .chain(&self.frequent_list)
            .chain(&self.archaic_list)
            .chain(&self.embeddings)
        {
            manifest.input(p)?;
        }
        let lexicon = Lexicon::load(&LexiconSources {
            tables: self.tables.clone(),
            frequent_list: self.frequent_list.clone(),
            archaic_list: self.archaic_list.clone(),
        })?;
        let embeddings = self
            .embeddings
            .as_deref()
            .map(EmbeddingTable::load)
            .transpose()?;
        if self.tables.is_empty() {
            log::warn!("no lexicon tables configured; lexicon features will be absent");
        }
        Ok(Resources {
            lexicon,
            embeddings,
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subset {
    #[default]
    All,
    Single,
    Mwe,
}

/// Where labelled feature rows come from: released TSVs featurized on the
/// fly, or a feature matrix joined with labels and instances by id.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub released: Option<PathBuf>,
    pub matrix: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub instances: Option<PathBuf>,
    pub subset: Subset,
    /// Feature groups to zero out before modelling, e.g. `"all but A,C,H-J"`.
    pub drop: Option<String>,
}

fn is_mwe_file(path: &Path) -> bool {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().to_lowercase())
        .unwrap_or_default();
    name.contains("multi") || name.contains("mwe")
}

pub fn load_released(path: &Path) -> Result<Vec<ReleasedEntry>> {
    if path.is_dir() {
        Ok(read_release_dir(path)?)
    } else {
        Ok(read_released(path, is_mwe_file(path))?)
    }
}

impl DataConfig {
    pub fn load(&self, resources: &ResourcesConfig, manifest: &mut RunManifest) -> Result<Dataset> {
        let data = match (&self.released, &self.matrix) {
            (Some(_), Some(_)) => bail!(crate::validation(
                "set either data.released or data.matrix, not both"
            )),
            (None, None) => bail!(crate::validation(
                "no data source: set data.released or data.matrix"
            )),
            (Some(released), None) => {
                manifest.input(released)?;
                let entries = load_released(released)?;
                let res = resources.load(manifest)?;
                Dataset::from_released(&entries, &res.featurizer())?
            }
            (None, Some(matrix)) => self.load_matrix(matrix, manifest)?,
        };
        let data = match self.subset {
            Subset::All => data,
            Subset::Single => data.filter(|i| !data.is_mwe[i]),
            Subset::Mwe => data.filter(|i| data.is_mwe[i]),
        };
        if data.is_empty() {
            bail!(crate::validation("data source yielded no rows"));
        }
        Ok(match &self.drop {
            Some(spec) => zero_groups(data, spec)?,
            None => data,
        })
    }

    fn load_matrix(&self, matrix: &Path, manifest: &mut RunManifest) -> Result<Dataset> {
        let (Some(labels), Some(instances)) = (&self.labels, &self.instances) else {
            bail!(crate::validation(
                "data.matrix requires data.labels and data.instances"
            ));
        };
        for p in [matrix, labels.as_path(), instances.as_path()] {
            manifest.input(p)?;
        }
        let m = read_matrix(matrix)?;
        if matrix.extension().is_some_and(|e| e == "bin") {
            manifest.input(&FeatureMatrix::sidecar_path(matrix))?;
        }
        let labels: HashMap<String, f64> = read_labels(labels)?
            .into_iter()
            .map(|l| (l.instance_id, l.mean))
            .collect();
        let instances: HashMap<String, _> = read_instances(instances)?
            .into_iter()
            .map(|i| (i.id.clone(), i))
            .collect();
        let mut keep = Vec::new();
        let (mut genres, mut is_mwe, mut y) = (Vec::new(), Vec::new(), Vec::new());
        for (row, id) in m.ids.iter().enumerate() {
            let Some(label) = labels.get(id) else {
                continue;
            };
            let inst = instances.get(id).ok_or_else(|| {
                crate::validation(format!("matrix row `{id}` has no instance record"))
            })?;
            keep.push(row);
            genres.push(inst.genre.clone());
            is_mwe.push(inst.is_mwe);
            y.push(*label);
        }
        let skipped = m.n_rows() - keep.len();
        if skipped > 0 {
            log::info!("{skipped} matrix rows have no label and were skipped");
        }
        let joined = FeatureMatrix::from_rows(
            m.layout.clone(),
            keep.iter().map(|&r| m.ids[r].clone()).collect(),
            keep.iter().map(|&r| m.rows[r].clone()).collect(),
        );
        Ok(Dataset::from_matrix(&joined, genres, is_mwe, y)?)
    }
}

pub fn read_matrix(path: &Path) -> Result<FeatureMatrix> {
    if path.extension().is_some_and(|e| e == "bin") {
        Ok(FeatureMatrix::read_binary(path)?)
    } else {
        Ok(FeatureMatrix::read_tsv(path)?)
    }
}

fn zero_groups(mut data: Dataset, spec: &str) -> Result<Dataset> {
    let set = AblationSet::parse(spec)?;
    for c in set.removed_columns(&data.layout) {
        data.x.column_mut(c).fill(0.0);
    }
    Ok(data)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    #[default]
    Regression,
    Forest,
}

impl std::str::FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "regression" => Ok(ModelKind::Regression),
            "forest" => Ok(ModelKind::Forest),
            other => Err(format!(
                "unknown model `{other}` (expected regression or forest)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub ridge_lambda: f64,
    pub forest: ForestParams,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            kind: ModelKind::Regression,
            ridge_lambda: DEFAULT_RIDGE_LAMBDA,
            forest: ForestParams::default(),
        }
    }
}

impl ModelConfig {
    pub fn trainer(&self) -> Box<dyn Trainer> {
        match self.kind {
            ModelKind::Regression => Box::new(RegressionTrainer {
                ridge_lambda: self.ridge_lambda,
            }),
            ModelKind::Forest => Box::new(ForestTrainer {
                params: self.forest,
            }),
        }
    }
}
