//! Closed loop of plant, excitation and estimator at the control rate.

use thiserror::Error;

use crate::estimator::{window_average, EAveSample, ETimelineRow, Estimator, EstimatorConfig, EstimatorError};
use crate::plant::{JointVector, Plant, PlantConfig, PlantError};
use crate::probe::{apply_vibration_in_place, VibrationCommand};
use crate::types::{MuscleId, SensorFrame};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RigError {
    #[error(transparent)]
    Plant(#[from] PlantError),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
    #[error("muscle {0} is not part of the plant")]
    UnknownMuscle(MuscleId),
}

#[derive(Debug, Clone)]
pub struct Rig {
    plant: Plant,
    estimator: Estimator,
    vibration: VibrationCommand,
    theta_ref: JointVector,
    base: Vec<f64>,
    command: Vec<f64>,
    timeline: Vec<ETimelineRow>,
    frames: Option<Vec<SensorFrame>>,
}

impl Rig {
    pub fn new(plant_cfg: PlantConfig, estimator_cfg: EstimatorConfig, vibration: VibrationCommand) -> Result<Self, RigError> {
        let plant = Plant::new(plant_cfg)?;
        Self::from_plant(plant, estimator_cfg, vibration)
    }

    pub fn from_plant(plant: Plant, estimator_cfg: EstimatorConfig, vibration: VibrationCommand) -> Result<Self, RigError> {
        let m = plant.muscle_count();
        if let Some(id) = vibration.group_v.members.iter().chain(&estimator_cfg.group_o.members).find(|id| id.0 >= m) {
            return Err(RigError::UnknownMuscle(*id));
        }
        let estimator = Estimator::new(estimator_cfg)?;
        let theta_ref = plant.config().initial_posture;
        let base = plant.state().l_ref.clone();
        Ok(Self { command: base.clone(), plant, estimator, vibration, theta_ref, base, timeline: Vec::new(), frames: None })
    }

    /// Keeps every sensor frame from now on.
    pub fn record(&mut self) {
        self.frames.get_or_insert_with(Vec::new);
    }

    pub fn plant(&self) -> &Plant {
        &self.plant
    }

    pub fn plant_mut(&mut self) -> &mut Plant {
        &mut self.plant
    }

    pub fn estimator_config(&self) -> &EstimatorConfig {
        self.estimator.config()
    }

    pub fn vibration(&self) -> &VibrationCommand {
        &self.vibration
    }

    pub fn set_vibration(&mut self, vibration: VibrationCommand) {
        self.vibration = vibration;
    }

    pub fn joint_target(&self) -> JointVector {
        self.theta_ref
    }

    pub fn warm(&self) -> bool {
        self.estimator.state().warm
    }

    pub fn time(&self) -> f64 {
        self.plant.time()
    }

    pub fn timeline(&self) -> &[ETimelineRow] {
        &self.timeline
    }

    pub fn frames(&self) -> Option<&[SensorFrame]> {
        self.frames.as_deref()
    }

    pub fn into_parts(self) -> (Plant, Vec<ETimelineRow>, Option<Vec<SensorFrame>>) {
        (self.plant, self.timeline, self.frames)
    }

    fn ticks(&self, seconds: f64) -> u64 {
        (seconds * self.plant.config().control_rate).round().max(0.0) as u64
    }

    /// One control tick: excite, integrate, sample, estimate.
    pub fn tick(&mut self) -> Result<(), RigError> {
        let t = self.plant.time();
        self.command.copy_from_slice(&self.base);
        apply_vibration_in_place(&mut self.command, t, &self.vibration).map_err(RigError::UnknownMuscle)?;
        self.plant.tick(&self.command)?;
        let frame = self.plant.sample_sensors();
        if let Some(row) = self.estimator.push(&frame)? {
            self.timeline.push(row);
        }
        if let Some(frames) = self.frames.as_mut() {
            frames.push(frame);
        }
        Ok(())
    }

    pub fn hold(&mut self, seconds: f64) -> Result<(), RigError> {
        for _ in 0..self.ticks(seconds) {
            self.tick()?;
        }
        Ok(())
    }

    /// Interpolates the joint target linearly to `target` over `seconds`.
    pub fn move_to(&mut self, target: &JointVector, seconds: f64) -> Result<(), RigError> {
        let n = self.ticks(seconds);
        let start = self.theta_ref;
        for k in 1..=n {
            let s = k as f64 / n as f64;
            let mut theta = start;
            for j in 0..theta.len() {
                theta[j] = start[j] + (target[j] - start[j]) * s;
            }
            self.set_target(&theta)?;
            self.tick()?;
        }
        if n == 0 {
            self.set_target(target)?;
        }
        Ok(())
    }

    pub fn set_target(&mut self, theta: &JointVector) -> Result<(), RigError> {
        self.base = self.plant.set_joint_targets(theta)?;
        self.theta_ref = *theta;
        Ok(())
    }

    /// E^ave over the last `seconds` of the timeline.
    pub fn e_ave(&self, seconds: f64) -> Result<EAveSample, RigError> {
        let series: Vec<(f64, f64)> = self.timeline.iter().map(|r| (r.t, r.e)).collect();
        Ok(window_average(&series, seconds)?)
    }
}
