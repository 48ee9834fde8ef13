//! JSON file formats: experiment configs, datasets of measurement sets and
//! candidate pose lists.

mod config;
mod dataset;
mod spec;

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use config::{ExperimentConfig, OutputPaths, SceneSpec};
pub use dataset::{
    load_candidates, load_dataset, read_candidates, read_dataset, save_candidates, save_dataset,
    write_candidates, write_dataset, CandidatesFile, Dataset, DatasetFile, SetRecord,
};
pub use spec::{BoardSpec, CalibrationSpec, GeometrySpec, PoseSpec, QUATERNION_TOLERANCE};

/// Version written into and expected from every file.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Deserialize)]
struct VersionProbe {
    version: Option<u32>,
}

/// Parses a versioned JSON document. `context` names the source in errors.
pub(crate) fn parse_versioned<T: DeserializeOwned>(text: &str, context: &str) -> Result<T> {
    let probe: VersionProbe = serde_json::from_str(text).map_err(|e| parse_error(e, context))?;
    match probe.version {
        None => {
            return Err(Error::Parse {
                context: context.into(),
                message: "missing field `version`".into(),
            })
        }
        Some(v) if v != FORMAT_VERSION => {
            return Err(Error::VersionMismatch {
                found: v,
                expected: FORMAT_VERSION,
            })
        }
        Some(_) => {}
    }
    serde_json::from_str(text).map_err(|e| parse_error(e, context))
}

fn parse_error(e: serde_json::Error, context: &str) -> Error {
    Error::Parse {
        context: context.into(),
        message: format!("line {} column {}: {e}", e.line(), e.column()),
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::from(e).context(path.display().to_string()))
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::from(e).context(path.display().to_string()))
}
