//! TOML experiment configuration and the two shipped presets.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use cbsf::dataset::RatingFormat;
use cbsf::neighbors::TopsisParams;
use cbsf::predictor::NeighborStrategy;
use cbsf::similarity::{CbsDominant, CbsParams, Measure, UASimParams};

use crate::error::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetSection,
    #[serde(default)]
    pub split: SplitSection,
    #[serde(default)]
    pub similarity: SimilaritySection,
    #[serde(default)]
    pub neighbors: NeighborsSection,
    #[serde(default)]
    pub groups: GroupsSection,
    #[serde(default)]
    pub candidates: CandidatesSection,
    #[serde(default)]
    pub eval: EvalSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSection {
    pub name: String,
    pub ratings: PathBuf,
    pub format: FormatName,
    #[serde(default)]
    pub trust: Option<PathBuf>,
    /// Target rating scale; ratings are affinely mapped onto it after load.
    #[serde(default)]
    pub normalize: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum FormatName {
    MovielensTab,
    FilmtrustSpace,
}

impl From<FormatName> for RatingFormat {
    fn from(f: FormatName) -> Self {
        match f {
            FormatName::MovielensTab => RatingFormat::MovielensTab,
            FormatName::FilmtrustSpace => RatingFormat::FilmtrustSpace,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SplitSection {
    pub test_ratio: f64,
    pub seed: u64,
}

impl Default for SplitSection {
    fn default() -> Self {
        Self {
            test_ratio: 0.2,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimilaritySection {
    pub measure: MeasureName,
    pub uasim_w: f64,
    pub uasim_beta: f64,
    pub cbs_dominant: DominantName,
    pub cbs_a: f64,
    pub cbs_th: f64,
}

impl Default for SimilaritySection {
    fn default() -> Self {
        Self {
            measure: MeasureName::Cbs,
            uasim_w: 2.0,
            uasim_beta: 0.5,
            cbs_dominant: DominantName::Uasimj,
            cbs_a: 0.8,
            cbs_th: 0.2,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum MeasureName {
    Cosine,
    Jaccard,
    Taj,
    Uasim,
    Uasimj,
    Cbs,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum DominantName {
    Uasimj,
    Taj,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NeighborsSection {
    pub strategy: StrategyName,
    pub k: usize,
    pub topsis_w_s: f64,
    pub topsis_w_u: f64,
    pub topsis_w_sbar: f64,
    pub topsis_w: f64,
}

impl Default for NeighborsSection {
    fn default() -> Self {
        Self {
            strategy: StrategyName::Topsis,
            k: 100,
            topsis_w_s: 1.0 / 3.0,
            topsis_w_u: 1.0 / 3.0,
            topsis_w_sbar: 1.0 / 3.0,
            topsis_w: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum StrategyName {
    Knn,
    Topsis,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GroupsSection {
    pub count: usize,
    pub min_size: usize,
    pub max_size: usize,
    pub seed: u64,
}

impl Default for GroupsSection {
    fn default() -> Self {
        Self {
            count: 120,
            min_size: 3,
            max_size: 30,
            seed: 43,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CandidatesSection {
    pub n_filter: usize,
    pub n_borda: usize,
    pub n_top: usize,
}

impl Default for CandidatesSection {
    fn default() -> Self {
        Self {
            n_filter: 40,
            n_borda: 50,
            n_top: 40,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalSection {
    /// Recommendation list lengths to sweep.
    pub n_top: Vec<usize>,
    /// Replace the configured measure with cosine and disable Borda
    /// enrichment, emulating the plain aggregation baseline.
    pub baseline: bool,
}

impl Default for EvalSection {
    fn default() -> Self {
        Self {
            n_top: vec![5, 10, 15, 20, 25, 30, 35, 40],
            baseline: false,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Applies the global seed override: the split uses it directly, group
    /// generation uses seed + 1.
    pub fn apply_seed(&mut self, seed: u64) {
        self.split.seed = seed;
        self.groups.seed = seed.wrapping_add(1);
    }

    pub fn validate(&self) -> Result<(), String> {
        if !self.dataset.ratings.is_file() {
            return Err(format!(
                "dataset.ratings: file not found: {}",
                self.dataset.ratings.display()
            ));
        }
        if let Some(trust) = &self.dataset.trust {
            if !trust.is_file() {
                return Err(format!("dataset.trust: file not found: {}", trust.display()));
            }
        }
        if let Some([lo, hi]) = self.dataset.normalize {
            if !(hi > lo) {
                return Err(format!(
                    "dataset.normalize: interval [{lo}, {hi}] is empty"
                ));
            }
        }
        if !(self.split.test_ratio > 0.0 && self.split.test_ratio < 1.0) {
            return Err(format!(
                "split.test_ratio: must be in (0, 1), got {}",
                self.split.test_ratio
            ));
        }
        self.uasim_params().map_err(|e| format!("similarity: {e}"))?;
        self.cbs_params().map_err(|e| format!("similarity: {e}"))?;
        if self.neighbors.k < 1 {
            return Err("neighbors.k: must be at least 1".into());
        }
        self.topsis_params().map_err(|e| format!("neighbors: {e}"))?;
        if self.groups.count < 1 {
            return Err("groups.count: must be at least 1".into());
        }
        if self.groups.min_size < 1 {
            return Err("groups.min_size: must be at least 1".into());
        }
        if self.groups.max_size < self.groups.min_size {
            return Err("groups.max_size: must be at least groups.min_size".into());
        }
        if self.candidates.n_filter < 1 {
            return Err("candidates.n_filter: must be at least 1".into());
        }
        if self.candidates.n_top < 1 {
            return Err("candidates.n_top: must be at least 1".into());
        }
        if self.eval.n_top.is_empty() {
            return Err("eval.n_top: sweep list must not be empty".into());
        }
        if self.eval.n_top.iter().any(|&n| n < 1) {
            return Err("eval.n_top: list lengths must be at least 1".into());
        }
        Ok(())
    }

    pub fn uasim_params(&self) -> cbsf::Result<UASimParams> {
        UASimParams::new(self.similarity.uasim_w, self.similarity.uasim_beta)
    }

    pub fn cbs_params(&self) -> cbsf::Result<CbsParams> {
        let dominant = match self.similarity.cbs_dominant {
            DominantName::Uasimj => CbsDominant::Uasimj,
            DominantName::Taj => CbsDominant::Taj,
        };
        CbsParams::new(dominant, self.similarity.cbs_a, self.similarity.cbs_th)
    }

    pub fn topsis_params(&self) -> cbsf::Result<TopsisParams> {
        let n = &self.neighbors;
        TopsisParams::new(n.topsis_w_s, n.topsis_w_u, n.topsis_w_sbar, n.topsis_w)
    }

    pub fn measure(&self) -> cbsf::Result<Measure> {
        let up = self.uasim_params()?;
        Ok(match self.similarity.measure {
            MeasureName::Cosine => Measure::Cosine,
            MeasureName::Jaccard => Measure::Jaccard,
            MeasureName::Taj => Measure::Taj,
            MeasureName::Uasim => Measure::Uasim(up),
            MeasureName::Uasimj => Measure::Uasimj(up),
            MeasureName::Cbs => Measure::Cbs(up, self.cbs_params()?),
        })
    }

    pub fn strategy(&self) -> cbsf::Result<NeighborStrategy> {
        Ok(match self.neighbors.strategy {
            StrategyName::Knn => NeighborStrategy::Knn,
            StrategyName::Topsis => NeighborStrategy::Topsis(self.topsis_params()?),
        })
    }
}

/// Parameter presets matching the two reference datasets. Data files are
/// expected under `data/`; override with `--config` if they live elsewhere.
pub fn preset(name: &str) -> Option<ExperimentConfig> {
    let text = match name {
        "movielens100k" => MOVIELENS_100K,
        "filmtrust" => FILMTRUST,
        _ => return None,
    };
    Some(toml::from_str(text).expect("presets are valid"))
}

pub const PRESET_NAMES: &[&str] = &["movielens100k", "filmtrust"];

const MOVIELENS_100K: &str = r#"
[dataset]
name = "movielens100k"
ratings = "data/ml-100k/u.data"
format = "movielens-tab"

[split]
test_ratio = 0.2
seed = 42

[similarity]
measure = "cbs"
uasim_w = 2.0
uasim_beta = 0.5
cbs_dominant = "uasimj"
cbs_a = 0.8
cbs_th = 0.2

[neighbors]
strategy = "topsis"
k = 100

[groups]
count = 120
min_size = 3
max_size = 30
seed = 43

[candidates]
n_filter = 40
n_borda = 50
n_top = 40

[eval]
n_top = [5, 10, 15, 20, 25, 30, 35, 40]
"#;

const FILMTRUST: &str = r#"
[dataset]
name = "filmtrust"
ratings = "data/filmtrust/ratings.txt"
format = "filmtrust-space"
trust = "data/filmtrust/trust.txt"
normalize = [1.0, 5.0]

[split]
test_ratio = 0.2
seed = 42

[similarity]
measure = "cbs"
uasim_w = 2.0
uasim_beta = 0.5
cbs_dominant = "taj"
cbs_a = 0.6
cbs_th = 0.8

[neighbors]
strategy = "knn"
k = 50

[groups]
count = 120
min_size = 3
max_size = 30
seed = 43

[candidates]
n_filter = 40
n_borda = 50
n_top = 40

[eval]
n_top = [5, 10, 15, 20, 25, 30, 35, 40]
"#;
