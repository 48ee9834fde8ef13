use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{parse_versioned, read_text, to_json, write_text, BoardSpec, PoseSpec, FORMAT_VERSION};
use crate::error::{Error, Result};
use crate::geom::Pose;
use crate::sensing::{CameraIntrinsics, CandidateSet, MeasurementSet, PixelObservation, TargetBoard};

/// One measurement set as stored: the reported robot pose `T_eb` and
/// `(marker_id, u, v)` triples in pixels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetRecord {
    pub robot_pose: PoseSpec,
    pub observations: Vec<(usize, f64, f64)>,
}

/// On-disk dataset document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetFile {
    pub version: u32,
    pub intrinsics: CameraIntrinsics,
    pub board: BoardSpec,
    pub sets: Vec<SetRecord>,
}

/// A validated dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub intrinsics: CameraIntrinsics,
    pub board: TargetBoard,
    pub sets: Vec<MeasurementSet>,
}

impl DatasetFile {
    pub fn from_dataset(d: &Dataset) -> Self {
        DatasetFile {
            version: FORMAT_VERSION,
            intrinsics: d.intrinsics,
            board: BoardSpec::of(&d.board),
            sets: d
                .sets
                .iter()
                .map(|s| SetRecord {
                    robot_pose: PoseSpec::from_pose(&s.robot_pose),
                    observations: s.observations.iter().map(|o| (o.marker_id, o.u, o.v)).collect(),
                })
                .collect(),
        }
    }

    pub fn into_dataset(self) -> Result<Dataset> {
        self.intrinsics.validate()?;
        let board = self.board.build()?;
        let sets = self
            .sets
            .iter()
            .enumerate()
            .map(|(i, rec)| {
                let what = format!("set {i}");
                let pose = rec.robot_pose.to_pose(&what)?;
                let obs = rec
                    .observations
                    .iter()
                    .map(|&(id, u, v)| {
                        if id >= board.len() {
                            return Err(Error::InvariantViolation(format!(
                                "{what}: marker id {id} not on a board of {} markers",
                                board.len()
                            )));
                        }
                        Ok(PixelObservation { marker_id: id, u, v })
                    })
                    .collect::<Result<Vec<_>>>()?;
                MeasurementSet::new(pose, obs).map_err(|e| e.context(what))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset {
            intrinsics: self.intrinsics,
            board,
            sets,
        })
    }
}

pub fn read_dataset(text: &str, context: &str) -> Result<Dataset> {
    parse_versioned::<DatasetFile>(text, context)?.into_dataset()
}

pub fn write_dataset(d: &Dataset) -> String {
    to_json(&DatasetFile::from_dataset(d))
}

pub fn load_dataset(path: &Path) -> Result<Dataset> {
    read_dataset(&read_text(path)?, &path.display().to_string())
}

pub fn save_dataset(path: &Path, d: &Dataset) -> Result<()> {
    write_text(path, &write_dataset(d))
}

/// On-disk list of candidate robot poses `T_eb`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidatesFile {
    pub version: u32,
    pub poses: Vec<PoseSpec>,
}

pub fn read_candidates(text: &str, context: &str) -> Result<CandidateSet> {
    let f: CandidatesFile = parse_versioned(text, context)?;
    let poses = f
        .poses
        .iter()
        .enumerate()
        .map(|(i, p)| p.to_pose(&format!("candidate {i}")))
        .collect::<Result<Vec<Pose>>>()?;
    if poses.is_empty() {
        return Err(Error::EmptyCandidateSet);
    }
    Ok(CandidateSet::new(poses))
}

pub fn write_candidates(c: &CandidateSet) -> String {
    to_json(&CandidatesFile {
        version: FORMAT_VERSION,
        poses: c.iter().map(PoseSpec::from_pose).collect(),
    })
}

pub fn load_candidates(path: &Path) -> Result<CandidateSet> {
    read_candidates(&read_text(path)?, &path.display().to_string())
}

pub fn save_candidates(path: &Path, c: &CandidateSet) -> Result<()> {
    write_text(path, &write_candidates(c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensing::{camera_look_at, simulate_measurement, NoiseModel, Scene};
    use nalgebra::Vector3;

    fn dataset() -> Dataset {
        let scene = Scene::default_workcell(NoiseModel::default());
        let sets = (0..3)
            .map(|i| {
                let cam = camera_look_at(&Vector3::zeros(), 0.5, i as f64, 1.0);
                simulate_measurement(&scene, &scene.robot_pose_for_camera(&cam), i).unwrap()
            })
            .collect();
        Dataset {
            intrinsics: scene.intrinsics,
            board: scene.board,
            sets,
        }
    }

    fn max_pose_diff(a: &Pose, b: &Pose) -> f64 {
        (a.rotation.matrix() - b.rotation.matrix())
            .abs()
            .max()
            .max((a.translation - b.translation).abs().max())
    }

    #[test]
    fn round_trip() {
        let d = dataset();
        let back = read_dataset(&write_dataset(&d), "mem").unwrap();
        assert_eq!(back.intrinsics, d.intrinsics);
        assert_eq!(back.board, d.board);
        assert_eq!(back.sets.len(), 3);
        for (a, b) in back.sets.iter().zip(&d.sets) {
            assert_eq!(a.observations, b.observations);
            assert!(max_pose_diff(&a.robot_pose, &b.robot_pose) < 1e-12);
        }
    }

    #[test]
    fn non_unit_quaternion_names_the_set() {
        let mut f = DatasetFile::from_dataset(&dataset());
        f.sets[1].robot_pose.quaternion = [0.9, 0.0, 0.0, 0.0];
        let err = read_dataset(&to_json(&f), "mem").unwrap_err();
        assert!(matches!(err, Error::InvariantViolation(ref m) if m.contains("set 1")), "{err}");
    }

    #[test]
    fn missing_intrinsics_is_a_parse_error() {
        let mut v: serde_json::Value = serde_json::from_str(&write_dataset(&dataset())).unwrap();
        v.as_object_mut().unwrap().remove("intrinsics");
        let err = read_dataset(&v.to_string(), "mem").unwrap_err();
        assert!(matches!(err, Error::Parse { ref message, .. } if message.contains("intrinsics")), "{err}");
    }

    #[test]
    fn version_and_marker_checks() {
        let mut f = DatasetFile::from_dataset(&dataset());
        f.version = 7;
        assert!(matches!(
            read_dataset(&to_json(&f), "mem"),
            Err(Error::VersionMismatch { found: 7, expected: 1 })
        ));
        let mut f = DatasetFile::from_dataset(&dataset());
        f.sets[0].observations[0].0 = 99;
        assert!(matches!(read_dataset(&to_json(&f), "mem"), Err(Error::InvariantViolation(_))));
        let err = read_dataset("{\"version\": 1,\n \"intrinsics\": [}", "mem").unwrap_err();
        assert!(matches!(err, Error::Parse { ref message, .. } if message.starts_with("line 2")), "{err}");
    }

    #[test]
    fn candidates_round_trip_on_disk() {
        let scene = Scene::default_workcell(NoiseModel::noiseless());
        let c = crate::sensing::generate_candidates(&Default::default(), &scene).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("candidates.json");
        save_candidates(&path, &c).unwrap();
        let back = load_candidates(&path).unwrap();
        assert_eq!(back.len(), c.len());
        for (a, b) in back.iter().zip(c.iter()) {
            assert!(max_pose_diff(a, b) < 1e-12);
        }
        let ds = dir.path().join("data.json");
        save_dataset(&ds, &dataset()).unwrap();
        assert_eq!(load_dataset(&ds).unwrap().sets.len(), 3);
        assert!(matches!(load_dataset(&dir.path().join("nope.json")), Err(Error::Context { .. })));
    }
}
