//! Motor and cable state of a single muscle.

use serde::{Deserialize, Serialize};

use super::config::{FrictionParams, MotorParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuscleState {
    /// mm, servo output
    pub motor: f64,
    /// mm/s
    pub motor_rate: f64,
    /// mm, cable position after the output lag; tracks the commanded length
    pub cable: f64,
    /// mm/s
    pub cable_rate: f64,
    /// mm, extension of the motor-side half of the series element
    pub split: f64,
    /// mm, accumulated slip on the drum (never decreases)
    pub slip: f64,
}

impl MuscleState {
    pub(crate) fn at_rest(l_ref: f64, stretch: f64, k_joint: f64, k_motor: f64) -> Self {
        Self {
            motor: l_ref,
            motor_rate: 0.0,
            cable: l_ref,
            cable_rate: 0.0,
            split: neutral_split(stretch, k_joint, k_motor),
            slip: 0.0,
        }
    }

    /// Advances the servo and the output lag toward `command`.
    pub(crate) fn advance_motor(&mut self, command: f64, m: &MotorParams, lag_gain: f64, dt: f64) {
        let w = 2.0 * std::f64::consts::PI * m.servo_frequency;
        let accel = w * w * (command - self.motor) - 2.0 * m.servo_damping * w * self.motor_rate;
        self.motor_rate = (self.motor_rate + accel * dt).clamp(-m.slew_limit, m.slew_limit);
        self.motor += self.motor_rate * dt;
        let before = self.cable;
        self.cable += (self.motor - self.cable) * lag_gain;
        self.cable_rate = (self.cable - before) / dt;
    }
}

/// Tension difference across the routing point as a function of the split:
/// joint-side force minus motor-side force. Non-increasing in `y`.
fn imbalance(stretch: f64, y: f64, k_joint: f64, k_motor: f64) -> f64 {
    k_joint * (stretch - y).max(0.0) - k_motor * y.max(0.0)
}

/// Split with no force across the routing point.
pub(crate) fn neutral_split(stretch: f64, k_joint: f64, k_motor: f64) -> f64 {
    if stretch > 0.0 {
        k_joint * stretch / (k_joint + k_motor)
    } else {
        stretch.min(0.0)
    }
}

/// Smallest move of `y` that brings `imbalance` to `target`. Only called
/// when the current imbalance lies beyond the target.
fn solve_split(stretch: f64, target: f64, k_joint: f64, k_motor: f64, y: f64) -> f64 {
    // both halves taut
    let both = (k_joint * stretch - target) / (k_joint + k_motor);
    if both >= 0.0 && both <= stretch {
        return both;
    }
    // motor side slack: k_joint (stretch - y) = target
    if target > 0.0 {
        let cand = stretch - target / k_joint;
        if cand < 0.0 {
            return cand;
        }
    }
    // joint side slack: -k_motor y = target
    if target < 0.0 {
        let cand = -target / k_motor;
        if cand > stretch {
            return cand;
        }
    }
    // zero target inside the flat region where both halves are slack
    y.clamp(stretch.min(0.0), 0.0f64.max(stretch))
}

/// Forces on both sides of a muscle after the routing point has stuck or
/// slid for this step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CableForces {
    /// N, elastic tension on the joint side
    pub joint: f64,
    /// N, tension at the load cell
    pub motor: f64,
}

/// Updates the routing split and drum slip for the given total stretch
/// (path length minus cable position minus slip) and returns both tensions.
pub(crate) fn update_routing(
    state: &mut MuscleState,
    stretch: f64,
    k_joint: f64,
    k_motor: f64,
    fr: &FrictionParams,
) -> CableForces {
    let y = state.split;
    let diff = imbalance(stretch, y, k_joint, k_motor);
    let joint = k_joint * (stretch - y).max(0.0);
    let level = fr.coulomb + fr.capstan * joint;
    if diff > level {
        state.split = solve_split(stretch, level, k_joint, k_motor, y);
    } else if diff < -level {
        state.split = solve_split(stretch, -level, k_joint, k_motor, y);
    }
    let mut motor = k_motor * state.split.max(0.0);
    if motor > fr.anchor_hold {
        let slide = (motor - fr.anchor_hold) / k_motor;
        state.slip += slide;
        state.split -= slide;
        motor = fr.anchor_hold;
    }
    CableForces { joint: k_joint * (stretch - state.split).max(0.0), motor }
}

/// Elastic energy (J) stored in both halves.
pub(crate) fn cable_energy(state: &MuscleState, stretch: f64, k_joint: f64, k_motor: f64) -> f64 {
    let e1 = (stretch - state.split).max(0.0);
    let e2 = state.split.max(0.0);
    0.5 * (k_joint * e1 * e1 + k_motor * e2 * e2) * 1e-3
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fr(coulomb: f64, capstan: f64) -> FrictionParams {
        FrictionParams { coulomb, capstan, anchor_hold: 1e9, routing_ratio: 1.0 }
    }

    #[test]
    fn neutral_split_balances() {
        let y = neutral_split(2.0, 20.0, 20.0);
        assert_eq!(imbalance(2.0, y, 20.0, 20.0), 0.0);
    }

    #[test]
    fn small_changes_stick() {
        let mut s = MuscleState::at_rest(0.0, 1.0, 20.0, 20.0);
        let before = update_routing(&mut s, 1.0, 20.0, 20.0, &fr(1.0, 0.0));
        let after = update_routing(&mut s, 1.04, 20.0, 20.0, &fr(1.0, 0.0));
        assert_eq!(before.motor, after.motor);
        assert!(after.joint > before.joint);
    }

    #[test]
    fn sliding_keeps_difference_at_level() {
        let mut s = MuscleState::at_rest(0.0, 1.0, 20.0, 20.0);
        let f = update_routing(&mut s, 2.0, 20.0, 20.0, &fr(1.0, 0.0));
        assert!((f.joint - f.motor - 1.0).abs() < 1e-12, "{f:?}");
        let f = update_routing(&mut s, 0.5, 20.0, 20.0, &fr(1.0, 0.0));
        assert!((f.motor - f.joint - 1.0).abs() < 1e-12, "{f:?}");
    }

    #[test]
    fn going_slack_releases_motor_side() {
        let mut s = MuscleState::at_rest(0.0, 1.0, 20.0, 20.0);
        let f = update_routing(&mut s, -3.0, 20.0, 20.0, &fr(0.5, 0.0));
        assert_eq!(f.joint, 0.0);
        assert!((f.motor - 0.5).abs() < 1e-12);
    }

    #[test]
    fn drum_slip_is_one_way() {
        let mut s = MuscleState::at_rest(0.0, 1.0, 20.0, 20.0);
        let params = FrictionParams { coulomb: 0.0, capstan: 0.0, anchor_hold: 30.0, routing_ratio: 1.0 };
        let f = update_routing(&mut s, 5.0, 20.0, 20.0, &params);
        assert!((f.motor - 30.0).abs() < 1e-12);
        let slip = s.slip;
        assert!(slip > 0.0);
        update_routing(&mut s, 0.0, 20.0, 20.0, &params);
        assert_eq!(s.slip, slip);
    }

    #[test]
    fn servo_settles_on_command() {
        let mut s = MuscleState::at_rest(0.0, 0.0, 20.0, 20.0);
        let m = MotorParams::default();
        let gain = 1.0 - (-0.001 / m.lag).exp();
        for _ in 0..3000 {
            s.advance_motor(5.0, &m, gain, 0.001);
        }
        assert!((s.cable - 5.0).abs() < 1e-6);
    }
}
