//! Domain types shared by the estimator, the probe and the plant simulator.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Dense index of a muscle, stable for the lifetime of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MuscleId(pub usize);

impl MuscleId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for MuscleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "m{}", self.0)
    }
}

/// Name of a muscle group. The four built-in groups split both arms into
/// upper arm and forearm halves.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GroupName {
    /// Left upper arm.
    UL,
    /// Left forearm.
    DL,
    /// Right upper arm.
    UR,
    /// Right forearm.
    DR,
    Custom(String),
}

impl GroupName {
    pub const BUILTIN: [GroupName; 4] = [GroupName::UL, GroupName::DL, GroupName::UR, GroupName::DR];

    pub fn parse(s: &str) -> GroupName {
        match s {
            "UL" => GroupName::UL,
            "DL" => GroupName::DL,
            "UR" => GroupName::UR,
            "DR" => GroupName::DR,
            other => GroupName::Custom(other.to_string()),
        }
    }
}

impl fmt::Display for GroupName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupName::UL => f.write_str("UL"),
            GroupName::DL => f.write_str("DL"),
            GroupName::UR => f.write_str("UR"),
            GroupName::DR => f.write_str("DR"),
            GroupName::Custom(s) => f.write_str(s),
        }
    }
}

/// An ordered, non-empty set of muscles.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MuscleGroup {
    pub name: GroupName,
    pub members: Vec<MuscleId>,
}

impl MuscleGroup {
    pub fn new(name: GroupName, members: Vec<MuscleId>) -> Self {
        Self { name, members }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, id: MuscleId) -> bool {
        self.members.contains(&id)
    }

    pub fn overlaps(&self, other: &MuscleGroup) -> bool {
        self.members.iter().any(|m| other.contains(*m))
    }
}

/// One control-rate sample of every muscle: commanded length and measured
/// length in mm, tension in N, timestamp in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorFrame {
    pub t: f64,
    pub l_ref: Vec<f64>,
    pub l: Vec<f64>,
    pub f: Vec<f64>,
}

impl SensorFrame {
    pub fn muscle_count(&self) -> usize {
        self.f.len()
    }

    pub fn tension(&self, id: MuscleId) -> Option<f64> {
        self.f.get(id.0).copied()
    }

    /// Rounds every field to the 1e-6 resolution used by the sensor log, so
    /// that a frame written and read back is bit-identical.
    pub fn quantized(mut self) -> Self {
        self.t = quantize(self.t);
        for v in self.l_ref.iter_mut().chain(self.l.iter_mut()).chain(self.f.iter_mut()) {
            *v = quantize(*v);
        }
        self
    }
}

/// Rounds to six decimals. The result prints exactly under `{:.6}` and parses
/// back to the same bits.
pub fn quantize(v: f64) -> f64 {
    let q = (v * 1e6).round() / 1e6;
    // avoid "-0.000000" in logs
    if q == 0.0 {
        0.0
    } else {
        q
    }
}
