use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{parse_versioned, read_text, to_json, write_text, BoardSpec, CalibrationSpec, GeometrySpec, FORMAT_VERSION};
use crate::error::{Error, Result};
use crate::evaluation::{DistanceRule, Policy};
use crate::infogain::NbvConfig;
use crate::sensing::{CameraIntrinsics, CandidateGeometry, NoiseModel, Scene};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub intrinsics: CameraIntrinsics,
    pub board: BoardSpec,
    /// Ground-truth calibration used by the simulator.
    pub truth: CalibrationSpec,
    pub noise: NoiseModel,
}

impl SceneSpec {
    pub fn of(scene: &Scene) -> Self {
        SceneSpec {
            intrinsics: scene.intrinsics,
            board: BoardSpec::of(&scene.board),
            truth: CalibrationSpec::of(&scene.truth),
            noise: scene.noise,
        }
    }

    pub fn build(&self) -> Result<Scene> {
        self.intrinsics.validate()?;
        self.noise.validate()?;
        Ok(Scene {
            intrinsics: self.intrinsics,
            board: self.board.build()?,
            truth: self.truth.build()?,
            noise: self.noise,
        })
    }
}

/// File names written into the output directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    pub runs_csv: String,
    pub summary_json: String,
    pub scatter_csv: String,
}

impl Default for OutputPaths {
    fn default() -> Self {
        OutputPaths {
            runs_csv: "runs.csv".into(),
            summary_json: "summary.json".into(),
            scatter_csv: "nbv_scatter.csv".into(),
        }
    }
}

/// A full simulated comparison of view-selection policies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub scene: SceneSpec,
    pub candidates: GeometrySpec,
    pub nbv: NbvConfig,
    #[serde(default)]
    pub distance_rule: DistanceRule,
    pub policies: Vec<Policy>,
    pub seeds: Vec<u64>,
    /// Held-out views per seed used for the validation metrics.
    pub validation_views: usize,
    #[serde(default)]
    pub outputs: OutputPaths,
}

impl Default for ExperimentConfig {
    /// Default workcell, all three policies, 5 added views, 20 seeds.
    fn default() -> Self {
        ExperimentConfig {
            version: FORMAT_VERSION,
            scene: SceneSpec::of(&Scene::default_workcell(NoiseModel::default())),
            candidates: GeometrySpec::of(&CandidateGeometry::default()),
            nbv: NbvConfig::default(),
            distance_rule: DistanceRule::MaxMin,
            policies: vec![Policy::Nbv, Policy::Random, Policy::MaxDistance],
            seeds: (0..20).collect(),
            validation_views: 10,
            outputs: OutputPaths::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.policies.is_empty() {
            return Err(Error::InvalidConfig("at least one policy is required".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::InvalidConfig("at least one seed is required".into()));
        }
        if self.validation_views < 2 {
            return Err(Error::InvalidConfig(format!(
                "validation needs at least 2 views, got {}",
                self.validation_views
            )));
        }
        self.nbv.validate()?;
        self.candidates.build()?;
        self.scene.build()?;
        Ok(())
    }

    pub fn from_json(text: &str, context: &str) -> Result<Self> {
        let cfg: ExperimentConfig = parse_versioned(text, context)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        to_json(self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&read_text(path)?, &path.display().to_string())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_text(path, &self.to_json())
    }
}
