//! Planar forward kinematics of the torso and both arms.
//!
//! Generalized coordinates are absolute link angles, clockwise positive:
//! `q[0]` torso (0 = upright), `q[1]`/`q[2]` left upper arm / forearm,
//! `q[3]`/`q[4]` right upper arm / forearm (0 = hanging down, negative swings
//! forward). Joint angles are the differences between adjacent links. The
//! world frame has its origin at the waist, x forward, y up, in metres.

use serde::{Deserialize, Serialize};

use super::config::{Arm, JointVector, PlantConfig, JOINT_COUNT};

pub const COORD_COUNT: usize = 5;
pub type Coords = [f64; COORD_COUNT];

pub type Vec2 = [f64; 2];

/// Body point an environment can bind to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Site {
    LeftHand,
    LeftElbow,
    RightHand,
    RightElbow,
}

impl Site {
    pub fn arm(self) -> Arm {
        match self {
            Site::LeftHand | Site::LeftElbow => Arm::Left,
            Site::RightHand | Site::RightElbow => Arm::Right,
        }
    }

    pub fn is_hand(self) -> bool {
        matches!(self, Site::LeftHand | Site::RightHand)
    }
}

pub(crate) fn upper_index(arm: Arm) -> usize {
    match arm {
        Arm::Left => 1,
        Arm::Right => 3,
    }
}

/// Joint angles from link angles.
pub fn joint_angles(q: &Coords) -> JointVector {
    [q[1] - q[0], q[2] - q[1], q[3] - q[0], q[4] - q[3]]
}

/// Link angles from a torso angle and joint angles.
pub fn coords_from_joints(torso: f64, theta: &JointVector) -> Coords {
    let a1 = torso + theta[0];
    let a3 = torso + theta[2];
    [torso, a1, a1 + theta[1], a3, a3 + theta[3]]
}

/// Maps joint-space torques onto the link coordinates (transpose of the
/// joint-angle map).
pub fn joint_torques_to_coords(tau: &JointVector) -> Coords {
    [-tau[0] - tau[2], tau[0] - tau[1], tau[1], tau[2] - tau[3], tau[3]]
}

fn link_dir(a: f64) -> Vec2 {
    [-a.sin(), -a.cos()]
}

fn link_dir_derivative(a: f64) -> Vec2 {
    [-a.cos(), a.sin()]
}

pub fn shoulder_position(cfg: &PlantConfig, q: &Coords) -> Vec2 {
    let lt = cfg.torso.length;
    [lt * q[0].sin(), lt * q[0].cos()]
}

/// Position of a site in metres and its Jacobian with respect to the link
/// coordinates (one column per coordinate).
pub fn site_position_jacobian(cfg: &PlantConfig, q: &Coords, site: Site) -> (Vec2, [Vec2; COORD_COUNT]) {
    let arm = site.arm();
    let params = cfg.arm(arm);
    let iu = upper_index(arm);
    let lt = cfg.torso.length;
    let mut jac = [[0.0; 2]; COORD_COUNT];

    let mut p = shoulder_position(cfg, q);
    jac[0] = [lt * q[0].cos(), -lt * q[0].sin()];

    let du = link_dir(q[iu]);
    let ddu = link_dir_derivative(q[iu]);
    p[0] += params.upper.length * du[0];
    p[1] += params.upper.length * du[1];
    jac[iu] = [params.upper.length * ddu[0], params.upper.length * ddu[1]];

    if site.is_hand() {
        let df = link_dir(q[iu + 1]);
        let ddf = link_dir_derivative(q[iu + 1]);
        p[0] += params.fore.length * df[0];
        p[1] += params.fore.length * df[1];
        jac[iu + 1] = [params.fore.length * ddf[0], params.fore.length * ddf[1]];
    }
    (p, jac)
}

pub fn site_position(cfg: &PlantConfig, q: &Coords, site: Site) -> Vec2 {
    site_position_jacobian(cfg, q, site).0
}

pub fn site_velocity(cfg: &PlantConfig, q: &Coords, qd: &Coords, site: Site) -> Vec2 {
    let (_, jac) = site_position_jacobian(cfg, q, site);
    let mut v = [0.0; 2];
    for (col, rate) in jac.iter().zip(qd) {
        v[0] += col[0] * rate;
        v[1] += col[1] * rate;
    }
    v
}

/// Generalized gravity forces (N·m) on the link coordinates and the matching
/// potential energy (J).
pub fn gravity(cfg: &PlantConfig, q: &Coords) -> (Coords, f64) {
    let mut force = [0.0; COORD_COUNT];
    if !cfg.gravity {
        return (force, 0.0);
    }
    let g = cfg.gravity_accel;
    let lt = cfg.torso.length;
    let mut potential = cfg.torso.mass * g * 0.5 * lt * q[0].cos();
    force[0] += cfg.torso.mass * g * 0.5 * lt * q[0].sin();
    for arm in [Arm::Left, Arm::Right] {
        let p = cfg.arm(arm);
        let iu = upper_index(arm);
        let (mu, mf) = (p.upper.mass, p.fore.mass);
        let (cu, cf) = (0.5 * p.upper.length, 0.5 * p.fore.length);
        force[0] += (mu + mf) * g * lt * q[0].sin();
        force[iu] -= (mu * cu + mf * p.upper.length) * g * q[iu].sin();
        force[iu + 1] -= mf * cf * g * q[iu + 1].sin();
        potential += (mu + mf) * g * lt * q[0].cos()
            - (mu * cu + mf * p.upper.length) * g * q[iu].cos()
            - mf * cf * g * q[iu + 1].cos();
    }
    (force, potential)
}

/// Hand position in millimetres.
pub fn hand_position_mm(cfg: &PlantConfig, q: &Coords, arm: Arm) -> Vec2 {
    let site = match arm {
        Arm::Left => Site::LeftHand,
        Arm::Right => Site::RightHand,
    };
    let p = site_position(cfg, q, site);
    [p[0] * 1000.0, p[1] * 1000.0]
}

/// Jacobian of the hand position (mm) with respect to the arm's joint rates
/// (rad/s), with the torso held still.
pub fn hand_joint_jacobian_mm(cfg: &PlantConfig, q: &Coords, arm: Arm) -> [[f64; 2]; JOINT_COUNT] {
    let site = match arm {
        Arm::Left => Site::LeftHand,
        Arm::Right => Site::RightHand,
    };
    let (_, jac) = site_position_jacobian(cfg, q, site);
    let iu = upper_index(arm);
    let mut out = [[0.0; 2]; JOINT_COUNT];
    // a shoulder rate turns both links of the arm; an elbow rate only the forearm
    let s = arm.shoulder();
    for k in 0..2 {
        out[s][k] = (jac[iu][k] + jac[iu + 1][k]) * 1000.0;
        out[s + 1][k] = jac[iu + 1][k] * 1000.0;
    }
    out
}
