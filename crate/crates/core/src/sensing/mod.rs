//! Camera model, calibration target, candidate viewpoints and the synthetic
//! robot + camera that produces measurements.

mod board;
mod camera;
mod candidates;
mod measurement;
mod simulator;

pub use board::{make_board, TargetBoard};
pub use camera::{project, project_jacobian, CameraIntrinsics, MIN_DEPTH};
pub use candidates::{camera_look_at, generate_candidates, CandidateGeometry, CandidateSet};
pub use measurement::{MeasurementSet, NoiseModel, PixelObservation};
pub use simulator::{
    simulate_measurement, simulate_measurement_with, stream_rng, visible_projections, Scene, MIN_MARKERS,
};
