//! Plant parameters and the default two-arm muscle layout.

use serde::{Deserialize, Serialize};

use crate::types::{GroupName, MuscleGroup, MuscleId};

use super::PlantError;

/// Actuated joint indices into a [`JointVector`].
pub const LEFT_SHOULDER: usize = 0;
pub const LEFT_ELBOW: usize = 1;
pub const RIGHT_SHOULDER: usize = 2;
pub const RIGHT_ELBOW: usize = 3;
pub const JOINT_COUNT: usize = 4;

/// Per-joint values ordered left shoulder, left elbow, right shoulder, right elbow.
pub type JointVector = [f64; JOINT_COUNT];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Arm {
    Left,
    Right,
}

impl Arm {
    pub fn shoulder(self) -> usize {
        match self {
            Arm::Left => LEFT_SHOULDER,
            Arm::Right => RIGHT_SHOULDER,
        }
    }

    pub fn elbow(self) -> usize {
        self.shoulder() + 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LinkParams {
    /// m
    pub length: f64,
    /// kg
    pub mass: f64,
    /// kg·m² about the proximal joint
    pub inertia: f64,
    /// N·m·s/rad, viscous damping of the proximal joint
    pub joint_damping: f64,
}

impl Default for LinkParams {
    fn default() -> Self {
        Self { length: 0.28, mass: 1.8, inertia: 0.05, joint_damping: 0.3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ArmParams {
    pub upper: LinkParams,
    pub fore: LinkParams,
}

impl Default for ArmParams {
    fn default() -> Self {
        Self {
            upper: LinkParams::default(),
            fore: LinkParams { length: 0.26, mass: 1.2, inertia: 0.06, joint_damping: 0.3 },
        }
    }
}

/// The torso is a passive inverted pendulum on a compliant waist with
/// stick-slip friction. Both shoulders sit at its top.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TorsoParams {
    /// m, waist to shoulders
    pub length: f64,
    pub mass: f64,
    pub inertia: f64,
    /// N·m/rad
    pub stiffness: f64,
    /// N·m·s/rad
    pub damping: f64,
    /// N·m, Coulomb level of the waist
    pub friction_torque: f64,
    /// N·m/rad, pre-sliding stiffness of the waist friction
    pub friction_stiffness: f64,
}

impl Default for TorsoParams {
    fn default() -> Self {
        Self {
            length: 0.5,
            mass: 12.0,
            inertia: 0.2,
            stiffness: 400.0,
            damping: 2.0,
            friction_torque: 0.5,
            friction_stiffness: 5000.0,
        }
    }
}

/// Motor model: a second-order position servo with a slew limit, followed by
/// a first-order lag between the servo and the cable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MotorParams {
    /// Hz
    pub servo_frequency: f64,
    pub servo_damping: f64,
    /// s
    pub lag: f64,
    /// mm/s
    pub slew_limit: f64,
}

impl Default for MotorParams {
    fn default() -> Self {
        Self { servo_frequency: 10.0, servo_damping: 0.4, lag: 0.008, slew_limit: 400.0 }
    }
}

/// Friction along each muscle's routing.
///
/// The series-elastic element is split in two by a routing point near the
/// motor, the motor side being `routing_ratio` times stiffer. The cable
/// sticks there until the tension difference across it exceeds
/// `coulomb + capstan * tension`, so small tension changes on the joint side
/// never reach the load cell on the motor side. At the motor drum the cable
/// slips once tension exceeds `anchor_hold`, permanently lengthening the
/// muscle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FrictionParams {
    /// N, tension-independent part of the routing friction level
    pub coulomb: f64,
    /// friction level added per newton of joint-side tension
    pub capstan: f64,
    /// N, tension at which the cable slips on the drum
    pub anchor_hold: f64,
    /// stiffness of the motor-side part over the joint-side part
    pub routing_ratio: f64,
}

impl Default for FrictionParams {
    fn default() -> Self {
        Self { coulomb: 0.3, capstan: 0.03, anchor_hold: 120.0, routing_ratio: 10.0 }
    }
}

impl FrictionParams {
    /// Joint-side and motor-side stiffness (N/mm) for a total series stiffness.
    pub fn split_stiffness(&self, series: f64) -> (f64, f64) {
        let r = self.routing_ratio;
        (series * (1.0 + r) / r, series * (1.0 + r))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SensorNoise {
    /// N
    pub tension_sigma: f64,
    /// mm
    pub length_sigma: f64,
}

impl Default for SensorNoise {
    fn default() -> Self {
        Self { tension_sigma: 1.0, length_sigma: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuscleSpec {
    pub group: GroupName,
    /// mm/rad per actuated joint; tension f produces joint torque R·f.
    pub moment_arms: Vec<f64>,
    /// mm, path length at zero joint angles
    pub rest_length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlantConfig {
    pub torso: TorsoParams,
    pub left_arm: ArmParams,
    pub right_arm: ArmParams,
    pub gravity: bool,
    /// m/s²
    pub gravity_accel: f64,
    pub muscles: Vec<MuscleSpec>,
    /// N/mm, stiffness of the whole series element (both halves)
    pub series_stiffness: f64,
    /// N·s/mm
    pub series_damping: f64,
    pub motor: MotorParams,
    pub friction: FrictionParams,
    pub noise: SensorNoise,
    /// mm by which commanded lengths are shortened to keep cables taut
    pub co_contraction: f64,
    /// rad
    pub initial_posture: JointVector,
    /// rad, inclusive [min, max] per joint
    pub joint_limits: [[f64; 2]; JOINT_COUNT],
    /// s, integrator step
    pub substep: f64,
    /// Hz
    pub control_rate: f64,
    pub rng_seed: u64,
}

impl Default for PlantConfig {
    fn default() -> Self {
        let elbow = -90f64.to_radians();
        Self {
            torso: TorsoParams::default(),
            left_arm: ArmParams::default(),
            right_arm: ArmParams::default(),
            gravity: true,
            gravity_accel: 9.81,
            muscles: default_muscles(),
            series_stiffness: 30.0,
            series_damping: 0.02,
            motor: MotorParams::default(),
            friction: FrictionParams::default(),
            noise: SensorNoise::default(),
            co_contraction: 1.0,
            initial_posture: [0.0, elbow, 0.0, elbow],
            joint_limits: [[-2.0, 0.6], [-2.4, 0.0], [-2.0, 0.6], [-2.4, 0.0]],
            substep: 0.001,
            control_rate: 125.0,
            rng_seed: 0,
        }
    }
}

/// Moment arms (mm/rad) of one upper-arm group: six shoulder muscles and four
/// biarticular shoulder-elbow muscles. Flexors (negative) are stronger than
/// extensors, as on a real arm.
const UPPER_ARM_LAYOUT: [(f64, f64); 10] = [
    (-32.0, 0.0),
    (-28.0, 0.0),
    (-24.0, 0.0),
    (26.0, 0.0),
    (22.0, 0.0),
    (18.0, 0.0),
    (-22.0, -16.0),
    (-18.0, -12.0),
    (18.0, 14.0),
    (14.0, 10.0),
];

/// Moment arms (mm/rad) of one forearm group, all acting on the elbow.
const FOREARM_LAYOUT: [f64; 8] = [-30.0, -26.0, -22.0, -18.0, 24.0, 20.0, 16.0, 12.0];

const REST_LENGTH: f64 = 300.0;

/// The default layout: UL (10), DL (8), UR (10), DR (8), in that id order.
pub fn default_muscles() -> Vec<MuscleSpec> {
    let mut out = Vec::with_capacity(36);
    for arm in [Arm::Left, Arm::Right] {
        let (upper, fore) = match arm {
            Arm::Left => (GroupName::UL, GroupName::DL),
            Arm::Right => (GroupName::UR, GroupName::DR),
        };
        for (sh, el) in UPPER_ARM_LAYOUT {
            let mut r = vec![0.0; JOINT_COUNT];
            r[arm.shoulder()] = sh;
            r[arm.elbow()] = el;
            out.push(MuscleSpec { group: upper.clone(), moment_arms: r, rest_length: REST_LENGTH });
        }
        for el in FOREARM_LAYOUT {
            let mut r = vec![0.0; JOINT_COUNT];
            r[arm.elbow()] = el;
            out.push(MuscleSpec { group: fore.clone(), moment_arms: r, rest_length: REST_LENGTH });
        }
    }
    out
}

impl PlantConfig {
    pub fn muscle_count(&self) -> usize {
        self.muscles.len()
    }

    pub fn arm(&self, arm: Arm) -> &ArmParams {
        match arm {
            Arm::Left => &self.left_arm,
            Arm::Right => &self.right_arm,
        }
    }

    /// Members of a named group, in id order.
    pub fn group(&self, name: &GroupName) -> MuscleGroup {
        let members = self
            .muscles
            .iter()
            .enumerate()
            .filter(|(_, m)| &m.group == name)
            .map(|(i, _)| MuscleId(i))
            .collect();
        MuscleGroup::new(name.clone(), members)
    }

    /// Ids of all muscles spanning the given joint.
    pub fn muscles_on_joint(&self, joint: usize) -> Vec<MuscleId> {
        self.muscles
            .iter()
            .enumerate()
            .filter(|(_, m)| m.moment_arms[joint] != 0.0)
            .map(|(i, _)| MuscleId(i))
            .collect()
    }

    pub fn control_period(&self) -> f64 {
        1.0 / self.control_rate
    }

    /// Integrator substeps per control tick.
    pub fn substeps_per_tick(&self) -> usize {
        (self.control_period() / self.substep).round() as usize
    }

    pub fn validate(&self) -> Result<(), PlantError> {
        let bad = |reason: String| Err(PlantError::BadConfig(reason));
        if self.muscles.is_empty() {
            return bad("no muscles".into());
        }
        for (i, m) in self.muscles.iter().enumerate() {
            if m.moment_arms.len() != JOINT_COUNT {
                return bad(format!(
                    "muscle {i} has {} moment arms, expected {JOINT_COUNT}",
                    m.moment_arms.len()
                ));
            }
            if m.moment_arms.iter().any(|r| !r.is_finite()) || !m.rest_length.is_finite() {
                return bad(format!("muscle {i} has non-finite geometry"));
            }
        }
        for j in 0..JOINT_COUNT {
            if self.muscles_on_joint(j).is_empty() {
                return bad(format!("joint {j} is not actuated by any muscle"));
            }
            let [lo, hi] = self.joint_limits[j];
            if !(lo < hi) {
                return bad(format!("joint {j} limits are empty"));
            }
            let q = self.initial_posture[j];
            if q < lo || q > hi {
                return bad(format!("initial posture of joint {j} outside its limits"));
            }
        }
        if !(self.series_stiffness > 0.0) {
            return bad("series_stiffness must be > 0".into());
        }
        if self.series_damping < 0.0 {
            return bad("series_damping must be >= 0".into());
        }
        let links = [&self.left_arm.upper, &self.left_arm.fore, &self.right_arm.upper, &self.right_arm.fore];
        if links.iter().any(|l| !(l.inertia > 0.0) || !(l.length > 0.0) || l.mass < 0.0) {
            return bad("links need positive length and inertia".into());
        }
        if !(self.torso.inertia > 0.0) || !(self.torso.length > 0.0) {
            return bad("torso needs positive length and inertia".into());
        }
        if !(self.substep > 0.0) || !(self.control_rate > 0.0) {
            return bad("substep and control_rate must be > 0".into());
        }
        let ratio = self.control_period() / self.substep;
        if (ratio - ratio.round()).abs() > 1e-9 || ratio.round() < 1.0 {
            return bad("control period must be a whole number of substeps".into());
        }
        if !(self.motor.servo_frequency > 0.0) || self.motor.lag < 0.0 || !(self.motor.slew_limit > 0.0) {
            return bad("invalid motor parameters".into());
        }
        let fr = &self.friction;
        if fr.coulomb < 0.0 || fr.capstan < 0.0 || !(fr.anchor_hold > 0.0) || !(fr.routing_ratio > 0.0) {
            return bad("invalid friction parameters".into());
        }
        if self.noise.tension_sigma < 0.0 || self.noise.length_sigma < 0.0 {
            return bad("noise sigmas must be >= 0".into());
        }
        Ok(())
    }
}
