//! Contact environments and their bindings to body sites.
//!
//! Every environment is a horizontal surface at `surface_height` (mm, world
//! frame). Depth is positive when the site is below the surface. The normal
//! force is a spring-damper; the tangential force is a pre-sliding spring
//! limited by Coulomb friction, except for bilateral bindings which hold the
//! site without a friction limit once engaged.

use serde::{Deserialize, Serialize};

use super::kinematics::Site;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnvironmentKind {
    None,
    /// rigid frame
    Stable,
    /// unscrewed frame: soft and loose
    Unstable,
    /// cylinder resting on a table: pushes only, slides easily
    Cylinder,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnvironmentModel {
    pub kind: EnvironmentKind,
    /// N/mm
    pub stiffness: f64,
    /// N·s/mm
    pub damping: f64,
    /// mm, deadband before the spring engages
    pub play: f64,
    pub unilateral: bool,
    /// tangential Coulomb coefficient
    pub friction: f64,
    /// N, push force beyond which the environment gives way
    pub max_force: Option<f64>,
    /// mm, world y of the surface
    pub surface_height: f64,
    pub attach_site: Site,
}

impl Default for EnvironmentModel {
    fn default() -> Self {
        Self::stable()
    }
}

impl EnvironmentModel {
    pub fn none() -> Self {
        Self {
            kind: EnvironmentKind::None,
            stiffness: 0.0,
            damping: 0.0,
            play: 0.0,
            unilateral: true,
            friction: 0.0,
            max_force: None,
            surface_height: 0.0,
            attach_site: Site::LeftHand,
        }
    }

    pub fn stable() -> Self {
        Self {
            kind: EnvironmentKind::Stable,
            stiffness: 50.0,
            damping: 0.05,
            play: 0.0,
            unilateral: false,
            friction: 0.8,
            max_force: None,
            surface_height: 0.0,
            attach_site: Site::LeftHand,
        }
    }

    pub fn unstable() -> Self {
        Self {
            kind: EnvironmentKind::Unstable,
            stiffness: 2.0,
            damping: 0.005,
            play: 1.0,
            unilateral: false,
            friction: 0.5,
            ..Self::stable()
        }
    }

    pub fn cylinder() -> Self {
        Self {
            kind: EnvironmentKind::Cylinder,
            stiffness: 50.0,
            damping: 0.05,
            play: 0.0,
            unilateral: true,
            friction: 0.02,
            // rolls away under a firm push
            max_force: Some(2.0),
            ..Self::stable()
        }
    }

    pub fn of_kind(kind: EnvironmentKind) -> Self {
        match kind {
            EnvironmentKind::None => Self::none(),
            EnvironmentKind::Stable => Self::stable(),
            EnvironmentKind::Unstable => Self::unstable(),
            EnvironmentKind::Cylinder => Self::cylinder(),
        }
    }

    pub fn at(mut self, site: Site, surface_height: f64) -> Self {
        self.attach_site = site;
        self.surface_height = surface_height;
        self
    }

    pub fn is_none(&self) -> bool {
        self.kind == EnvironmentKind::None
    }

    /// Normal force (N, upward) for a depth (mm) and depth rate (mm/s).
    /// `engaged` marks a bilateral binding that has touched the surface.
    pub fn normal_force(&self, depth: f64, depth_rate: f64, engaged: bool) -> f64 {
        if self.is_none() {
            return 0.0;
        }
        let holds = engaged && !self.unilateral;
        let compression = if depth > self.play {
            depth - self.play
        } else if holds && depth < -self.play {
            depth + self.play
        } else {
            return 0.0;
        };
        let force = self.stiffness * compression + self.damping * depth_rate;
        let force = if holds { force } else { force.max(0.0) };
        match self.max_force {
            Some(cap) => force.min(cap),
            None => force,
        }
    }

    /// Elastic energy (J) stored in the normal spring at a depth.
    pub fn normal_energy(&self, depth: f64, engaged: bool) -> f64 {
        if self.is_none() {
            return 0.0;
        }
        let holds = engaged && !self.unilateral;
        let c = if depth > self.play {
            depth - self.play
        } else if holds && depth < -self.play {
            depth + self.play
        } else {
            0.0
        };
        let mut c = c;
        if let Some(cap) = self.max_force {
            c = c.min(cap / self.stiffness);
        }
        0.5 * self.stiffness * c * c * 1e-3
    }
}

/// An environment bound to a site, with its contact state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentBinding {
    pub model: EnvironmentModel,
    pub site: Site,
    /// mm
    pub depth: f64,
    pub engaged: bool,
    /// mm, tangential pre-sliding displacement
    pub tangential: f64,
}

impl EnvironmentBinding {
    pub fn new(model: EnvironmentModel, site: Site) -> Self {
        Self { model, site, depth: 0.0, engaged: false, tangential: 0.0 }
    }

    /// Contact force (N, world x/y) given the site's height and velocity
    /// in mm and mm/s. Advances the tangential state by `dt`.
    pub(crate) fn force(&mut self, site_y: f64, site_vel: [f64; 2], dt: f64) -> [f64; 2] {
        if self.model.is_none() {
            self.depth = self.model.surface_height - site_y;
            return [0.0, 0.0];
        }
        self.depth = self.model.surface_height - site_y;
        if self.depth >= 0.0 {
            self.engaged = true;
        }
        let normal = self.model.normal_force(self.depth, -site_vel[1], self.engaged);
        let bilateral_hold = self.engaged && !self.model.unilateral;
        let in_contact = normal != 0.0 || (bilateral_hold && self.depth.abs() <= self.model.play);
        if !in_contact {
            self.tangential = 0.0;
            return [0.0, normal];
        }
        self.tangential += site_vel[0] * dt;
        let k = self.model.stiffness;
        let mut tangential = -k * self.tangential - self.model.damping * site_vel[0];
        if !bilateral_hold {
            let limit = self.model.friction * normal.max(0.0);
            if tangential.abs() > limit {
                tangential = tangential.signum() * limit;
                self.tangential = if k > 0.0 { -tangential / k } else { 0.0 };
            }
        }
        [tangential, normal]
    }

    pub(crate) fn energy(&self) -> f64 {
        self.model.normal_energy(self.depth, self.engaged)
            + 0.5 * self.model.stiffness * self.tangential * self.tangential * 1e-3
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn none_never_pushes() {
        let m = EnvironmentModel::none();
        for d in [-5.0, 0.0, 3.0, 100.0] {
            assert_eq!(m.normal_force(d, 10.0, true), 0.0);
        }
    }

    #[test]
    fn unilateral_detaches_under_tension() {
        let m = EnvironmentModel::cylinder();
        assert_eq!(m.normal_force(-0.5, 0.0, true), 0.0);
        assert!(m.normal_force(0.5, 0.0, true) > 0.0);
        // fast separation cannot make it pull
        assert_eq!(m.normal_force(0.01, -1000.0, true), 0.0);
    }

    #[test]
    fn deadband_has_no_force() {
        let m = EnvironmentModel::unstable();
        assert_eq!(m.normal_force(0.5, 0.0, true), 0.0);
        assert_eq!(m.normal_force(-0.5, 0.0, true), 0.0);
        assert!((m.normal_force(1.5, 0.0, true) - 1.0).abs() < 1e-12);
        assert!((m.normal_force(-1.5, 0.0, true) + 1.0).abs() < 1e-12);
        // not engaged yet: no pull
        assert_eq!(m.normal_force(-1.5, 0.0, false), 0.0);
    }

    #[test]
    fn stable_holds_once_engaged() {
        let m = EnvironmentModel::stable();
        assert_eq!(m.normal_force(-1.0, 0.0, false), 0.0);
        assert!((m.normal_force(-1.0, 0.0, true) + 50.0).abs() < 1e-12);
    }
}
