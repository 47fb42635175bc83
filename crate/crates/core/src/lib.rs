//! Active-vibration stability recognition for a simulated tendon-driven
//! upper body: plant model, propagation estimator, probe, scripted
//! experiments and file formats.

// `!(x >= lo)` style checks are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod estimator;
pub mod io;
pub mod plant;
pub mod probe;
pub mod rig;
pub mod scenario;
pub mod types;

pub use estimator::{ETimelineRow, EAveSample, Estimator, EstimatorConfig, EstimatorError, EstimatorState};
pub use io::{IoError, LogHeader, SensorLog};
pub use plant::{
    plant_init, EnvironmentKind, EnvironmentModel, JointVector, Plant, PlantConfig, PlantError, Site,
};
pub use probe::{ProbeError, ProbeReport, ProbeTiming, VibrationCommand, Verdict};
pub use rig::{Rig, RigError};
pub use scenario::{ExperimentReport, ScenarioConfig, ScenarioError, SweepDimension};
pub use types::{GroupName, MuscleGroup, MuscleId, SensorFrame};
