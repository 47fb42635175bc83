//! Sinusoidal excitation of one muscle group and the before/after stability
//! probe built on it.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimator::{EAveSample, EstimatorError};
use crate::plant::{JointVector, PlantConfig, PlantError};
use crate::rig::{Rig, RigError};
use crate::types::{GroupName, MuscleGroup, MuscleId};

/// Smallest E1 accepted as a baseline.
pub const BASELINE_EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProbeError {
    #[error("length command has no entry for muscle {0}")]
    MissingMuscle(MuscleId),
    #[error("baseline E^ave {0:.3e} is too small for a ratio")]
    DegenerateBaseline(f64),
    #[error("local motion drives muscle {0}, which belongs to the excited or observed group")]
    MotionViolatesGroups(MuscleId),
    #[error("{0} is shorter than the estimator window")]
    TimingTooShort(&'static str),
    #[error(transparent)]
    Rig(#[from] RigError),
}

impl From<PlantError> for ProbeError {
    fn from(e: PlantError) -> Self {
        ProbeError::Rig(RigError::Plant(e))
    }
}

impl From<EstimatorError> for ProbeError {
    fn from(e: EstimatorError) -> Self {
        ProbeError::Rig(RigError::Estimator(e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VibrationCommand {
    /// mm
    pub amplitude: f64,
    /// Hz
    pub freq: f64,
    pub group_v: MuscleGroup,
    pub enabled: bool,
}

impl Default for VibrationCommand {
    fn default() -> Self {
        Self {
            amplitude: 3.0,
            freq: 12.5,
            group_v: PlantConfig::default().group(&GroupName::UR),
            enabled: true,
        }
    }
}

impl VibrationCommand {
    pub fn off() -> Self {
        Self { enabled: false, ..Self::default() }
    }
}

/// `A sin(2πFt)`, or zero when disabled.
pub fn vibration_offset(t: f64, cmd: &VibrationCommand) -> f64 {
    if !cmd.enabled {
        return 0.0;
    }
    cmd.amplitude * (2.0 * PI * cmd.freq * t).sin()
}

/// Adds the excitation to the members of V; every other entry is copied.
pub fn apply_vibration(l_ref: &[f64], t: f64, cmd: &VibrationCommand) -> Result<Vec<f64>, ProbeError> {
    let mut out = l_ref.to_vec();
    apply_vibration_in_place(&mut out, t, cmd).map_err(ProbeError::MissingMuscle)?;
    Ok(out)
}

/// In-place variant; the error is the first V member without a command.
pub(crate) fn apply_vibration_in_place(l_ref: &mut [f64], t: f64, cmd: &VibrationCommand) -> Result<(), MuscleId> {
    if let Some(id) = cmd.group_v.members.iter().find(|m| m.0 >= l_ref.len()) {
        return Err(*id);
    }
    if !cmd.enabled {
        return Ok(());
    }
    let dl = vibration_offset(t, cmd);
    for id in &cmd.group_v.members {
        l_ref[id.0] += dl;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Stable,
    NotStable,
}

pub fn stability_ratio(e1: &EAveSample, e2: &EAveSample) -> Result<f64, ProbeError> {
    if !(e1.value > BASELINE_EPS) {
        return Err(ProbeError::DegenerateBaseline(e1.value));
    }
    Ok(e2.value / e1.value)
}

/// Stable iff `s < threshold`.
pub fn classify(s: f64, threshold: f64) -> Verdict {
    if s < threshold {
        Verdict::Stable
    } else {
        Verdict::NotStable
    }
}

/// Phase durations (s) of a probe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProbeTiming {
    pub measure1: f64,
    #[serde(rename = "move")]
    pub move_: f64,
    pub settle: f64,
    pub measure2: f64,
}

impl Default for ProbeTiming {
    fn default() -> Self {
        Self { measure1: 1.0, move_: 3.0, settle: 2.0, measure2: 1.0 }
    }
}

impl ProbeTiming {
    pub fn validate(&self, window_duration: f64) -> Result<(), ProbeError> {
        let phases = [("measure1", self.measure1), ("move", self.move_), ("settle", self.settle), ("measure2", self.measure2)];
        for (name, v) in phases {
            if !(v >= window_duration - 1e-12) {
                return Err(ProbeError::TimingTooShort(name));
            }
        }
        Ok(())
    }

    pub fn total(&self) -> f64 {
        self.measure1 + self.move_ + self.settle + self.measure2
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub e1: EAveSample,
    pub e2: EAveSample,
    pub s: f64,
    pub verdict: Verdict,
    pub threshold: f64,
}

/// Muscles whose command changes between two joint targets.
pub fn driven_muscles(cfg: &PlantConfig, from: &JointVector, to: &JointVector) -> Vec<MuscleId> {
    cfg.muscles
        .iter()
        .enumerate()
        .filter(|(_, m)| m.moment_arms.iter().zip(from.iter().zip(to)).any(|(r, (a, b))| *r != 0.0 && a != b))
        .map(|(i, _)| MuscleId(i))
        .collect()
}

/// Runs measure → local move → settle → measure with the excitation left
/// on throughout, and compares the two E^ave values. The rig must already be
/// excited and warm. `target` is the joint posture the local motion ends in.
pub fn probe_run(rig: &mut Rig, timing: &ProbeTiming, target: &JointVector, threshold: f64) -> Result<ProbeReport, ProbeError> {
    let window = rig.estimator_config().window_duration();
    timing.validate(window)?;
    let observed = rig.estimator_config().group_o.clone();
    let excited = rig.vibration().group_v.clone();
    for id in driven_muscles(rig.plant().config(), &rig.joint_target(), target) {
        if observed.contains(id) || excited.contains(id) {
            return Err(ProbeError::MotionViolatesGroups(id));
        }
    }
    if !rig.warm() {
        return Err(EstimatorError::NotWarm.into());
    }
    rig.hold(timing.measure1)?;
    let e1 = rig.e_ave(timing.measure1)?;
    rig.move_to(target, timing.move_)?;
    rig.hold(timing.settle)?;
    rig.hold(timing.measure2)?;
    let e2 = rig.e_ave(timing.measure2)?;
    let s = stability_ratio(&e1, &e2)?;
    Ok(ProbeReport { e1, e2, s, verdict: classify(s, threshold), threshold })
}
