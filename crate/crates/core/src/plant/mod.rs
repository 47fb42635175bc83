//! Planar two-arm tendon-driven torso.
//!
//! Each arm has a shoulder and an elbow pitch joint driven by antagonistic
//! series-elastic muscles with constant moment arms. The torso stands on a
//! compliant waist with stick-slip friction, which is how one arm's motion
//! reaches the other. Integration is semi-implicit Euler on a fixed substep;
//! sensors are sampled once per control tick.

pub mod config;
pub mod environment;
pub mod kinematics;
pub mod muscle;

use nalgebra::{SMatrix, SVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::types::{quantize, SensorFrame};

pub use config::{
    default_muscles, Arm, ArmParams, FrictionParams, JointVector, LinkParams, MotorParams, MuscleSpec,
    PlantConfig, SensorNoise, TorsoParams, JOINT_COUNT, LEFT_ELBOW, LEFT_SHOULDER, RIGHT_ELBOW,
    RIGHT_SHOULDER,
};
pub use environment::{EnvironmentBinding, EnvironmentKind, EnvironmentModel};
pub use kinematics::{Coords, Site, Vec2, COORD_COUNT};
pub use muscle::{CableForces, MuscleState};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlantError {
    #[error("bad plant config: {0}")]
    BadConfig(String),
    #[error("numerical divergence at t={t:.3}s: {reason}")]
    NumericalDivergence { t: f64, reason: String },
    #[error("joint {joint} target {value:.4} rad outside [{min:.4}, {max:.4}]")]
    JointLimit { joint: usize, value: f64, min: f64, max: f64 },
    #[error("an environment is already bound to {0:?}")]
    DuplicateBinding(Site),
    #[error("no environment bound to {0:?}")]
    NoSuchBinding(Site),
    #[error("command has {got} lengths, plant has {expected} muscles")]
    CommandSize { expected: usize, got: usize },
    #[error("initial equilibrium did not converge (residual {0:.3e})")]
    EquilibriumFailed(f64),
}

/// Upper bound on joint speed before a run is declared diverged.
pub const MAX_JOINT_RATE: f64 = 100.0;

/// Muscle path lengths (mm) for joint angles (rad): `rest - R·θ`.
pub fn muscle_path_length(theta: &JointVector, muscles: &[MuscleSpec]) -> Vec<f64> {
    muscles
        .iter()
        .map(|m| m.rest_length - m.moment_arms.iter().zip(theta).map(|(r, t)| r * t).sum::<f64>())
        .collect()
}

fn path_rate(theta_rate: &JointVector, spec: &MuscleSpec) -> f64 {
    -spec.moment_arms.iter().zip(theta_rate).map(|(r, t)| r * t).sum::<f64>()
}

/// Full mutable state of the simulated robot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantState {
    /// rad, link angles
    pub q: Coords,
    /// rad/s
    pub qd: Coords,
    pub muscles: Vec<MuscleState>,
    /// mm, command currently applied
    pub l_ref: Vec<f64>,
    /// N, joint-side tension from the latest substep
    pub joint_tension: Vec<f64>,
    /// N, load-cell tension from the latest substep
    pub sensed_tension: Vec<f64>,
    /// rad, pre-sliding deflection of the waist friction
    pub waist_bristle: f64,
    pub contacts: Vec<EnvironmentBinding>,
    /// substeps taken since init
    pub steps: u64,
}

/// A plant instance: configuration, state and the sensor noise generator.
#[derive(Debug, Clone)]
pub struct Plant {
    cfg: PlantConfig,
    state: PlantState,
    rng: ChaCha8Rng,
    inertia: Coords,
    joint_damping: JointVector,
    k_joint: f64,
    k_motor: f64,
    lag_gain: f64,
}

/// Builds a plant at rest at the configured posture.
pub fn plant_init(cfg: PlantConfig) -> Result<Plant, PlantError> {
    Plant::new(cfg)
}

impl Plant {
    pub fn new(cfg: PlantConfig) -> Result<Self, PlantError> {
        cfg.validate()?;
        let inertia = [
            cfg.torso.inertia,
            cfg.left_arm.upper.inertia,
            cfg.left_arm.fore.inertia,
            cfg.right_arm.upper.inertia,
            cfg.right_arm.fore.inertia,
        ];
        let joint_damping = [
            cfg.left_arm.upper.joint_damping,
            cfg.left_arm.fore.joint_damping,
            cfg.right_arm.upper.joint_damping,
            cfg.right_arm.fore.joint_damping,
        ];
        let (k_joint, k_motor) = cfg.friction.split_stiffness(cfg.series_stiffness);
        let lag_gain = if cfg.motor.lag > 0.0 { 1.0 - (-cfg.substep / cfg.motor.lag).exp() } else { 1.0 };
        let l_ref = command_for(&cfg, &cfg.initial_posture);
        let q = equilibrium(&cfg, &l_ref)?;
        let theta = kinematics::joint_angles(&q);
        let path = muscle_path_length(&theta, &cfg.muscles);
        let mut muscles = Vec::with_capacity(cfg.muscle_count());
        let mut tension = Vec::with_capacity(cfg.muscle_count());
        for (p, r) in path.iter().zip(&l_ref) {
            let stretch = p - r;
            muscles.push(MuscleState::at_rest(*r, stretch, k_joint, k_motor));
            tension.push(cfg.series_stiffness * stretch.max(0.0));
        }
        let state = PlantState {
            q,
            qd: [0.0; COORD_COUNT],
            muscles,
            l_ref,
            joint_tension: tension.clone(),
            sensed_tension: tension,
            waist_bristle: 0.0,
            contacts: Vec::new(),
            steps: 0,
        };
        let rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
        Ok(Self { cfg, state, rng, inertia, joint_damping, k_joint, k_motor, lag_gain })
    }

    pub fn config(&self) -> &PlantConfig {
        &self.cfg
    }

    pub fn state(&self) -> &PlantState {
        &self.state
    }

    pub fn muscle_count(&self) -> usize {
        self.cfg.muscle_count()
    }

    /// Simulated time in seconds.
    pub fn time(&self) -> f64 {
        self.state.steps as f64 * self.cfg.substep
    }

    pub fn joint_angles(&self) -> JointVector {
        kinematics::joint_angles(&self.state.q)
    }

    pub fn joint_rates(&self) -> JointVector {
        kinematics::joint_angles(&self.state.qd)
    }

    /// Current geometric path length of every muscle (mm).
    pub fn path_lengths(&self) -> Vec<f64> {
        muscle_path_length(&self.joint_angles(), &self.cfg.muscles)
    }

    /// Length commands that hold `theta_ref`, shortened by the co-contraction
    /// offset.
    pub fn set_joint_targets(&self, theta_ref: &JointVector) -> Result<Vec<f64>, PlantError> {
        for (j, &v) in theta_ref.iter().enumerate() {
            let [min, max] = self.cfg.joint_limits[j];
            if !(v >= min && v <= max) {
                return Err(PlantError::JointLimit { joint: j, value: v, min, max });
            }
        }
        Ok(command_for(&self.cfg, theta_ref))
    }

    /// Load-cell tensions (N) from the latest substep, noise free.
    pub fn tensions(&self) -> &[f64] {
        &self.state.sensed_tension
    }

    pub fn end_effector_pose(&self, arm: Arm) -> Vec2 {
        kinematics::hand_position_mm(&self.cfg, &self.state.q, arm)
    }

    /// Hand velocity (mm/s) of an arm.
    pub fn end_effector_velocity(&self, arm: Arm) -> Vec2 {
        let site = match arm {
            Arm::Left => Site::LeftHand,
            Arm::Right => Site::RightHand,
        };
        let v = kinematics::site_velocity(&self.cfg, &self.state.q, &self.state.qd, site);
        [v[0] * 1000.0, v[1] * 1000.0]
    }

    /// Site position (mm).
    pub fn site_position(&self, site: Site) -> Vec2 {
        let p = kinematics::site_position(&self.cfg, &self.state.q, site);
        [p[0] * 1000.0, p[1] * 1000.0]
    }

    pub fn attach_environment(&mut self, model: EnvironmentModel, site: Site) -> Result<(), PlantError> {
        if self.state.contacts.iter().any(|b| b.site == site) {
            return Err(PlantError::DuplicateBinding(site));
        }
        let mut binding = EnvironmentBinding::new(model, site);
        binding.depth = binding.model.surface_height - self.site_position(site)[1];
        self.state.contacts.push(binding);
        Ok(())
    }

    pub fn detach_environment(&mut self, site: Site) -> Result<EnvironmentBinding, PlantError> {
        let idx = self
            .state
            .contacts
            .iter()
            .position(|b| b.site == site)
            .ok_or(PlantError::NoSuchBinding(site))?;
        Ok(self.state.contacts.remove(idx))
    }

    pub fn binding(&self, site: Site) -> Option<&EnvironmentBinding> {
        self.state.contacts.iter().find(|b| b.site == site)
    }

    /// Advances one integrator substep under the length command `l_ref`.
    pub fn step(&mut self, l_ref: &[f64]) -> Result<(), PlantError> {
        let n = self.cfg.muscle_count();
        if l_ref.len() != n {
            return Err(PlantError::CommandSize { expected: n, got: l_ref.len() });
        }
        let dt = self.cfg.substep;
        let cfg = &self.cfg;
        let st = &mut self.state;
        st.l_ref.copy_from_slice(l_ref);

        let theta = kinematics::joint_angles(&st.q);
        let theta_rate = kinematics::joint_angles(&st.qd);
        let mut tau = [0.0; JOINT_COUNT];
        for (i, spec) in cfg.muscles.iter().enumerate() {
            let m = &mut st.muscles[i];
            m.advance_motor(l_ref[i], &cfg.motor, self.lag_gain, dt);
            let path = spec.rest_length - spec.moment_arms.iter().zip(&theta).map(|(r, t)| r * t).sum::<f64>();
            let stretch = path - m.cable - m.slip;
            let forces = muscle::update_routing(m, stretch, self.k_joint, self.k_motor, &cfg.friction);
            let mut joint = forces.joint;
            if joint > 0.0 {
                let rate = path_rate(&theta_rate, spec) - m.cable_rate;
                joint = (joint + cfg.series_damping * rate).max(0.0);
            }
            st.joint_tension[i] = joint;
            st.sensed_tension[i] = forces.motor;
            for (t, r) in tau.iter_mut().zip(&spec.moment_arms) {
                *t += r * joint * 1e-3;
            }
        }
        for j in 0..JOINT_COUNT {
            tau[j] -= self.joint_damping[j] * theta_rate[j];
        }
        let mut force = kinematics::joint_torques_to_coords(&tau);

        // waist
        let torso = &cfg.torso;
        force[0] -= torso.stiffness * st.q[0] + torso.damping * st.qd[0];
        st.waist_bristle += st.qd[0] * dt;
        let limit = torso.friction_torque / torso.friction_stiffness;
        st.waist_bristle = st.waist_bristle.clamp(-limit, limit);
        force[0] -= torso.friction_stiffness * st.waist_bristle;

        let (g, _) = kinematics::gravity(cfg, &st.q);
        for (f, gi) in force.iter_mut().zip(&g) {
            *f += gi;
        }

        for b in st.contacts.iter_mut() {
            let (p, jac) = kinematics::site_position_jacobian(cfg, &st.q, b.site);
            let mut v = [0.0; 2];
            for (col, rate) in jac.iter().zip(&st.qd) {
                v[0] += col[0] * rate;
                v[1] += col[1] * rate;
            }
            let fc = b.force(p[1] * 1000.0, [v[0] * 1000.0, v[1] * 1000.0], dt);
            for (f, col) in force.iter_mut().zip(&jac) {
                *f += col[0] * fc[0] + col[1] * fc[1];
            }
        }

        for (k, f) in force.iter().enumerate() {
            st.qd[k] += f / self.inertia[k] * dt;
            st.q[k] += st.qd[k] * dt;
        }
        st.steps += 1;

        let rates = kinematics::joint_angles(&st.qd);
        let finite = st.q.iter().chain(st.qd.iter()).all(|v| v.is_finite());
        if !finite || rates.iter().any(|r| r.abs() > MAX_JOINT_RATE) {
            return Err(PlantError::NumericalDivergence {
                t: st.steps as f64 * dt,
                reason: if finite { "joint rate above bound".into() } else { "non-finite state".into() },
            });
        }
        Ok(())
    }

    /// Runs one control period (several substeps) under a held command.
    pub fn tick(&mut self, l_ref: &[f64]) -> Result<(), PlantError> {
        for _ in 0..self.cfg.substeps_per_tick() {
            self.step(l_ref)?;
        }
        Ok(())
    }

    /// Noisy sensor readout at the current time, quantized to the log
    /// resolution. Lengths are the cable positions read by the motor encoders.
    pub fn sample_sensors(&mut self) -> SensorFrame {
        let noise = &self.cfg.noise;
        let mut l = Vec::with_capacity(self.muscle_count());
        let mut f = Vec::with_capacity(self.muscle_count());
        let len_noise = Normal::new(0.0, noise.length_sigma).ok();
        let ten_noise = Normal::new(0.0, noise.tension_sigma).ok();
        for (m, tension) in self.state.muscles.iter().zip(&self.state.sensed_tension) {
            let dl = match len_noise {
                Some(d) if noise.length_sigma > 0.0 => d.sample(&mut self.rng),
                _ => 0.0,
            };
            let df = match ten_noise {
                Some(d) if noise.tension_sigma > 0.0 => d.sample(&mut self.rng),
                _ => 0.0,
            };
            l.push(quantize(m.cable + dl));
            f.push(quantize((tension + df).max(0.0)));
        }
        SensorFrame {
            t: quantize(self.time()),
            l_ref: self.state.l_ref.iter().map(|v| quantize(*v)).collect(),
            l,
            f,
        }
    }

    /// Total stored energy (J): kinetic, gravity, waist spring and friction
    /// pre-sliding, both cable halves and contact springs.
    pub fn energy(&self) -> f64 {
        let st = &self.state;
        let kinetic: f64 = st.qd.iter().zip(&self.inertia).map(|(w, i)| 0.5 * i * w * w).sum();
        let (_, gravity) = kinematics::gravity(&self.cfg, &st.q);
        let torso = &self.cfg.torso;
        let waist = 0.5 * torso.stiffness * st.q[0] * st.q[0]
            + 0.5 * torso.friction_stiffness * st.waist_bristle * st.waist_bristle;
        let path = self.path_lengths();
        let cables: f64 = st
            .muscles
            .iter()
            .zip(&path)
            .map(|(m, p)| muscle::cable_energy(m, p - m.cable - m.slip, self.k_joint, self.k_motor))
            .sum();
        let contacts: f64 = st.contacts.iter().map(|b| b.energy()).sum();
        kinetic + gravity + waist + cables + contacts
    }
}

fn command_for(cfg: &PlantConfig, theta: &JointVector) -> Vec<f64> {
    muscle_path_length(theta, &cfg.muscles).into_iter().map(|l| l - cfg.co_contraction).collect()
}

/// Static generalized force at link angles `q` with motors at `l_ref` and
/// every routing point balanced.
fn static_force(cfg: &PlantConfig, q: &Coords, l_ref: &[f64]) -> Coords {
    let theta = kinematics::joint_angles(q);
    let path = muscle_path_length(&theta, &cfg.muscles);
    let mut tau = [0.0; JOINT_COUNT];
    for (i, spec) in cfg.muscles.iter().enumerate() {
        let f = cfg.series_stiffness * (path[i] - l_ref[i]).max(0.0);
        for (t, r) in tau.iter_mut().zip(&spec.moment_arms) {
            *t += r * f * 1e-3;
        }
    }
    let mut force = kinematics::joint_torques_to_coords(&tau);
    force[0] -= cfg.torso.stiffness * q[0];
    let (g, _) = kinematics::gravity(cfg, q);
    for (f, gi) in force.iter_mut().zip(&g) {
        *f += gi;
    }
    force
}

/// Newton solve for the resting posture under gravity.
fn equilibrium(cfg: &PlantConfig, l_ref: &[f64]) -> Result<Coords, PlantError> {
    let mut q = kinematics::coords_from_joints(0.0, &cfg.initial_posture);
    let h = 1e-7;
    let mut residual = f64::INFINITY;
    for _ in 0..50 {
        let f0 = static_force(cfg, &q, l_ref);
        residual = f0.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if residual < 1e-10 {
            return Ok(q);
        }
        let mut jac = SMatrix::<f64, COORD_COUNT, COORD_COUNT>::zeros();
        for k in 0..COORD_COUNT {
            let mut qp = q;
            qp[k] += h;
            let fp = static_force(cfg, &qp, l_ref);
            for r in 0..COORD_COUNT {
                jac[(r, k)] = (fp[r] - f0[r]) / h;
            }
        }
        let rhs = SVector::<f64, COORD_COUNT>::from_column_slice(&f0);
        let Some(dq) = jac.lu().solve(&rhs) else {
            return Err(PlantError::EquilibriumFailed(residual));
        };
        // damped step: the tension clamp makes the force only piecewise smooth
        let scale = (0.2 / dq.amax()).min(1.0);
        for k in 0..COORD_COUNT {
            q[k] -= scale * dq[k];
        }
    }
    if residual < 1e-7 {
        Ok(q)
    } else {
        Err(PlantError::EquilibriumFailed(residual))
    }
}
