//! Scripted experiments: the elbow staircase against several environments,
//! parameter sweeps on top of it, the lean-and-probe decision loop and the
//! bracing drift comparison. Every run is seeded and deterministic.

use std::path::PathBuf;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimator::{EAveSample, ETimelineRow, EstimatorConfig, EstimatorError};
use crate::plant::{
    kinematics, Arm, EnvironmentKind, EnvironmentModel, JointVector, PlantConfig, PlantError, Site, LEFT_ELBOW,
    LEFT_SHOULDER, RIGHT_ELBOW,
};
use crate::probe::{probe_run, ProbeError, ProbeReport, ProbeTiming, VibrationCommand, Verdict};
use crate::rig::{Rig, RigError};
use crate::types::{GroupName, SensorFrame};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error(transparent)]
    Rig(#[from] RigError),
    #[error(transparent)]
    Probe(#[from] ProbeError),
    #[error("bad scenario config: {0}")]
    BadConfig(String),
    #[error("unknown sweep dimension '{0}'")]
    UnknownDimension(String),
    #[error("scenario needs a {0:?} environment")]
    MissingEnvironment(EnvironmentKind),
    #[error("no offered environment passed the stability probe")]
    NoStableEnvironment,
}

impl From<PlantError> for ScenarioError {
    fn from(e: PlantError) -> Self {
        ScenarioError::Rig(RigError::Plant(e))
    }
}

impl From<EstimatorError> for ScenarioError {
    fn from(e: EstimatorError) -> Self {
        ScenarioError::Rig(RigError::Estimator(e))
    }
}

/// Move to `target` over `move_time`, then hold for `hold_time`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionSegment {
    /// rad
    pub target: JointVector,
    /// s
    pub move_time: f64,
    /// s
    pub hold_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProbeSettings {
    pub timing: ProbeTiming,
    pub threshold: f64,
}

impl Default for ProbeSettings {
    fn default() -> Self {
        Self { timing: ProbeTiming::default(), threshold: 0.6 }
    }
}

/// One (V, O) pairing of the grouping sweep and the amplitude used with it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grouping {
    pub v: GroupName,
    pub o: GroupName,
    /// mm
    pub amplitude: f64,
}

impl Grouping {
    pub fn label(&self) -> String {
        format!("V={},O={}", self.v, self.o)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepSettings {
    pub amplitudes: Vec<f64>,
    pub frequencies: Vec<f64>,
    pub groupings: Vec<Grouping>,
    /// alternating home/random trials per moved group, starting at home
    pub posture_trials: usize,
    pub posture_groups: Vec<GroupName>,
}

impl Default for SweepSettings {
    fn default() -> Self {
        use GroupName::*;
        let g = |v: GroupName, o: GroupName| {
            // closer pairs propagate more easily and get a smaller push
            let amplitude = match v {
                DR | UR => 3.0,
                UL => 2.0,
                _ => 1.0,
            };
            Grouping { v, o, amplitude }
        };
        Self {
            amplitudes: vec![0.0, 1.0, 2.0, 3.0],
            frequencies: vec![5.0, 12.5, 25.0],
            groupings: vec![g(DR, DL), g(UR, DL), g(UL, DL), g(DL, DL), g(UR, UL), g(DR, UL), g(UL, UL)],
            posture_trials: 7,
            posture_groups: vec![DR, UR, UL, DL],
        }
    }
}

/// Lean the left shoulder onto each offered environment in turn and keep the
/// first one the probe calls stable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExtensionSettings {
    pub environments: Vec<EnvironmentModel>,
    /// rad, left shoulder angle at the end of the lean
    pub lean: f64,
    /// fraction of the lean at which the hand meets the surface
    pub contact_fraction: f64,
}

impl Default for ExtensionSettings {
    fn default() -> Self {
        let rod = EnvironmentModel {
            stiffness: 0.5,
            damping: 0.002,
            play: 0.0,
            ..EnvironmentModel::unstable()
        };
        Self { environments: vec![rod, EnvironmentModel::stable()], lean: 0.15, contact_fraction: 0.3 }
    }
}

/// Repetitive right-elbow strokes with the left elbow optionally resting on a
/// table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BracingSettings {
    /// s
    pub duration: f64,
    /// rad
    pub stroke_from: f64,
    /// rad
    pub stroke_to: f64,
    /// s, toward `stroke_to`
    pub swing_time: f64,
    /// s, back to `stroke_from`
    pub return_time: f64,
    /// relative per-seed perturbation of the stroke amplitude
    pub stroke_jitter: f64,
    pub table: EnvironmentModel,
    /// rad, left shoulder angle while not braced
    pub lifted_shoulder: f64,
    /// rad, left shoulder angle that rests the elbow on the table
    pub braced_shoulder: f64,
    /// mm the table sits above the elbow at the braced posture
    pub table_press: f64,
    /// s, hold before the strokes start
    pub settle: f64,
    pub excite: bool,
}

impl Default for BracingSettings {
    fn default() -> Self {
        Self {
            duration: 20.0,
            stroke_from: -90f64.to_radians(),
            stroke_to: -60f64.to_radians(),
            swing_time: 0.7,
            return_time: 0.3,
            stroke_jitter: 0.05,
            table: EnvironmentModel::stable(),
            lifted_shoulder: -0.3,
            braced_shoulder: 0.0,
            table_press: 1.0,
            settle: 2.0,
            excite: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputPaths {
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub plant: PlantConfig,
    pub estimator: EstimatorConfig,
    pub excitation: VibrationCommand,
    /// environments for the staircase runs, all at the left hand
    pub environments: Vec<EnvironmentModel>,
    /// rad; when set, every staircase surface is placed at the hand height of
    /// this posture
    pub contact_posture: Option<JointVector>,
    /// s, hold at the initial posture before the script
    pub initial_hold: f64,
    pub motion_script: Vec<MotionSegment>,
    pub probe: ProbeSettings,
    pub repeats: usize,
    pub seeds: Vec<u64>,
    pub sweep: SweepSettings,
    pub extension: ExtensionSettings,
    pub bracing: BracingSettings,
    pub outputs: OutputPaths,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let mut plant = PlantConfig::default();
        let start = plant.initial_posture;
        plant.initial_posture[LEFT_ELBOW] = -100f64.to_radians();
        let mut contact = start;
        contact[LEFT_ELBOW] = -93f64.to_radians();
        let motion_script = [-90.0f64, -80.0, -70.0]
            .iter()
            .map(|deg| {
                let mut target = plant.initial_posture;
                target[LEFT_ELBOW] = deg.to_radians();
                MotionSegment { target, move_time: 3.0, hold_time: 5.0 }
            })
            .collect();
        let seeds: Vec<u64> = (1..=5).collect();
        Self {
            plant,
            estimator: EstimatorConfig::default(),
            excitation: VibrationCommand::default(),
            environments: [EnvironmentKind::None, EnvironmentKind::Stable, EnvironmentKind::Unstable, EnvironmentKind::Cylinder]
                .into_iter()
                .map(EnvironmentModel::of_kind)
                .collect(),
            contact_posture: Some(contact),
            initial_hold: 5.0,
            motion_script,
            probe: ProbeSettings::default(),
            repeats: seeds.len(),
            seeds,
            sweep: SweepSettings::default(),
            extension: ExtensionSettings::default(),
            bracing: BracingSettings::default(),
            outputs: OutputPaths::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let bad = |s: String| Err(ScenarioError::BadConfig(s));
        self.plant.validate()?;
        self.estimator.validate()?;
        if self.repeats != self.seeds.len() {
            return bad(format!("repeats = {} but {} seeds given", self.repeats, self.seeds.len()));
        }
        if self.seeds.is_empty() {
            return bad("at least one seed is required".into());
        }
        let window = self.estimator.window_duration();
        if !(self.initial_hold >= self.estimator.average_window) {
            return bad("initial_hold is shorter than the averaging window".into());
        }
        for (i, seg) in self.motion_script.iter().enumerate() {
            if !(seg.move_time >= 0.0) || !(seg.hold_time >= self.estimator.average_window) || seg.hold_time < window {
                return bad(format!("motion segment {i}: hold must cover the estimator and averaging windows"));
            }
        }
        self.probe.timing.validate(window)?;
        if !(self.probe.threshold > 0.0) {
            return bad("probe threshold must be > 0".into());
        }
        if self.excitation.freq != self.estimator.freq {
            return bad("excitation and estimator frequencies differ".into());
        }
        Ok(())
    }

    /// Plant config for one seeded repeat.
    pub fn plant_for(&self, seed: u64) -> PlantConfig {
        PlantConfig { rng_seed: seed, ..self.plant.clone() }
    }

    /// Staircase environments with their surfaces placed.
    pub fn placed_environments(&self) -> Vec<EnvironmentModel> {
        self.environments
            .iter()
            .map(|m| match self.contact_posture {
                Some(posture) => place_surface(m.clone(), &self.plant, &posture),
                None => m.clone(),
            })
            .collect()
    }

    /// Copy with the excitation and estimator set to another frequency.
    pub fn with_frequency(&self, freq: f64) -> Self {
        let mut out = self.clone();
        out.excitation.freq = freq;
        out.estimator = out.estimator.with_freq(freq);
        out
    }
}

/// Puts the surface of `model` at the height its site has at `posture`
/// (torso upright, no sag).
pub fn place_surface(model: EnvironmentModel, plant: &PlantConfig, posture: &JointVector) -> EnvironmentModel {
    let q = kinematics::coords_from_joints(0.0, posture);
    let y = kinematics::site_position(plant, &q, model.attach_site)[1] * 1000.0;
    let site = model.attach_site;
    model.at(site, y)
}

/// One seeded run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub label: String,
    pub seed: u64,
    pub timeline: Vec<ETimelineRow>,
    /// E^ave at the end of every hold, in order
    pub stops: Vec<EAveSample>,
}

impl RunRecord {
    pub fn values(&self) -> Vec<f64> {
        self.stops.iter().map(|s| s.value).collect()
    }
}

/// Mean and spread across seeds of one label's stops.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesStats {
    pub label: String,
    pub mean: Vec<f64>,
    /// sample standard deviation; absent with a single repeat
    pub std_dev: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetric {
    pub label: String,
    pub seed: u64,
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub runs: Vec<RunRecord>,
    pub stats: Vec<SeriesStats>,
    pub probes: Vec<ProbeReport>,
    pub metrics: Vec<RunMetric>,
}

impl ExperimentReport {
    fn from_runs(name: String, runs: Vec<RunRecord>) -> Self {
        let stats = series_stats(&runs);
        Self { name, runs, stats, probes: Vec::new(), metrics: Vec::new() }
    }

    pub fn series(&self, label: &str) -> Option<&SeriesStats> {
        self.stats.iter().find(|s| s.label == label)
    }

    pub fn runs_of<'a>(&'a self, label: &'a str) -> impl Iterator<Item = &'a RunRecord> + 'a {
        self.runs.iter().filter(move |r| r.label == label)
    }
}

/// Mean and sample standard deviation; the deviation is absent for one value.
pub fn mean_std(values: &[f64]) -> (f64, Option<f64>) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, None);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, None);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, Some(var.sqrt()))
}

/// Groups runs by label (first-seen order) and reduces each stop.
pub fn series_stats(runs: &[RunRecord]) -> Vec<SeriesStats> {
    let mut labels: Vec<&str> = Vec::new();
    for r in runs {
        if !labels.contains(&r.label.as_str()) {
            labels.push(&r.label);
        }
    }
    labels
        .into_iter()
        .map(|label| {
            let group: Vec<&RunRecord> = runs.iter().filter(|r| r.label == label).collect();
            let stops = group.iter().map(|r| r.stops.len()).min().unwrap_or(0);
            let (mean, std_dev) = (0..stops)
                .map(|k| mean_std(&group.iter().map(|r| r.stops[k].value).collect::<Vec<_>>()))
                .unzip();
            SeriesStats { label: label.to_string(), mean, std_dev }
        })
        .collect()
}

pub fn environment_label(model: &EnvironmentModel) -> String {
    format!("{:?}", model.kind)
}

/// A staircase run with optional frame recording.
pub struct StaircaseRun {
    pub record: RunRecord,
    pub frames: Option<Vec<SensorFrame>>,
}

/// Initial hold, then every script segment, against one environment.
pub fn run_staircase(
    cfg: &ScenarioConfig,
    env: &EnvironmentModel,
    seed: u64,
    label: &str,
    record_frames: bool,
) -> Result<StaircaseRun, ScenarioError> {
    let mut rig = Rig::new(cfg.plant_for(seed), cfg.estimator.clone(), cfg.excitation.clone())?;
    if record_frames {
        rig.record();
    }
    if !env.is_none() {
        rig.plant_mut().attach_environment(env.clone(), env.attach_site)?;
    }
    let avg = cfg.estimator.average_window;
    rig.hold(cfg.initial_hold)?;
    let mut stops = vec![rig.e_ave(avg)?];
    for seg in &cfg.motion_script {
        rig.move_to(&seg.target, seg.move_time)?;
        rig.hold(seg.hold_time)?;
        stops.push(rig.e_ave(avg)?);
    }
    let (_, timeline, frames) = rig.into_parts();
    Ok(StaircaseRun { record: RunRecord { label: label.to_string(), seed, timeline, stops }, frames })
}

fn staircase_report(name: String, cfg: &ScenarioConfig, envs: &[EnvironmentModel]) -> Result<ExperimentReport, ScenarioError> {
    let mut runs = Vec::new();
    for env in envs {
        let label = environment_label(env);
        for &seed in &cfg.seeds {
            runs.push(run_staircase(cfg, env, seed, &label, false)?.record);
        }
    }
    Ok(ExperimentReport::from_runs(name, runs))
}

/// Elbow staircase against every configured environment.
pub fn run_exp1(cfg: &ScenarioConfig) -> Result<ExperimentReport, ScenarioError> {
    cfg.validate()?;
    for kind in [EnvironmentKind::None, EnvironmentKind::Stable, EnvironmentKind::Unstable, EnvironmentKind::Cylinder] {
        if !cfg.environments.iter().any(|e| e.kind == kind) {
            return Err(ScenarioError::MissingEnvironment(kind));
        }
    }
    staircase_report("exp1".into(), cfg, &cfg.placed_environments())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepDimension {
    Amplitude,
    Frequency,
    Grouping,
    Posture,
}

impl FromStr for SweepDimension {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "amplitude" => Ok(Self::Amplitude),
            "frequency" => Ok(Self::Frequency),
            "grouping" => Ok(Self::Grouping),
            "posture" => Ok(Self::Posture),
            _ => Err(ScenarioError::UnknownDimension(s.to_string())),
        }
    }
}

fn none_and_stable(cfg: &ScenarioConfig) -> Result<Vec<EnvironmentModel>, ScenarioError> {
    let placed = cfg.placed_environments();
    let mut out = Vec::new();
    for kind in [EnvironmentKind::None, EnvironmentKind::Stable] {
        match placed.iter().find(|e| e.kind == kind) {
            Some(e) => out.push(e.clone()),
            None => return Err(ScenarioError::MissingEnvironment(kind)),
        }
    }
    Ok(out)
}

/// One report per swept value. Amplitude, frequency and grouping repeat the
/// staircase against None and Stable; posture runs the home/random protocol.
pub fn run_sweep(cfg: &ScenarioConfig, dimension: SweepDimension) -> Result<Vec<ExperimentReport>, ScenarioError> {
    cfg.validate()?;
    let sweep = &cfg.sweep;
    let mut out = Vec::new();
    match dimension {
        SweepDimension::Amplitude => {
            let envs = none_and_stable(cfg)?;
            for &a in &sweep.amplitudes {
                let mut c = cfg.clone();
                c.excitation.amplitude = a;
                out.push(staircase_report(format!("A={a}"), &c, &envs)?);
            }
        }
        SweepDimension::Frequency => {
            let envs = none_and_stable(cfg)?;
            for &f in &sweep.frequencies {
                let c = cfg.with_frequency(f);
                c.validate()?;
                out.push(staircase_report(format!("F={f}"), &c, &envs)?);
            }
        }
        SweepDimension::Grouping => {
            let envs = none_and_stable(cfg)?;
            for g in &sweep.groupings {
                let mut c = cfg.clone();
                c.excitation.group_v = c.plant.group(&g.v);
                c.excitation.amplitude = g.amplitude;
                c.estimator.group_o = c.plant.group(&g.o);
                c.validate()?;
                out.push(staircase_report(g.label(), &c, &envs)?);
            }
        }
        SweepDimension::Posture => {
            for group in &sweep.posture_groups {
                out.push(posture_report(cfg, group)?);
            }
        }
    }
    Ok(out)
}

/// Joints on which every member of the group acts.
pub fn group_joints(plant: &PlantConfig, group: &GroupName) -> Vec<usize> {
    let members = plant.group(group).members;
    (0..crate::plant::JOINT_COUNT)
        .filter(|&j| !members.is_empty() && members.iter().all(|id| plant.muscles[id.0].moment_arms[j] != 0.0))
        .collect()
}

/// Mean relative change of the home trials (odd trial numbers after the
/// first) against the first one.
pub fn return_change(stops: &[f64]) -> f64 {
    let base = stops[0];
    let returns: Vec<f64> = stops.iter().skip(2).step_by(2).map(|v| ((v - base) / base).abs()).collect();
    if returns.is_empty() {
        return 0.0;
    }
    returns.iter().sum::<f64>() / returns.len() as f64
}

fn posture_seed(seed: u64, group: &GroupName) -> u64 {
    let tag = match group {
        GroupName::UL => 1,
        GroupName::DL => 2,
        GroupName::UR => 3,
        GroupName::DR => 4,
        GroupName::Custom(s) => s.bytes().fold(5u64, |h, b| h.wrapping_mul(31).wrapping_add(b as u64)),
    };
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(tag)
}

/// Home and random postures alternate for the joints of one group, no
/// contact. Trial 1 is the home posture.
pub fn run_posture(cfg: &ScenarioConfig, group: &GroupName, seed: u64) -> Result<RunRecord, ScenarioError> {
    let joints = group_joints(&cfg.plant, group);
    if joints.is_empty() {
        return Err(ScenarioError::BadConfig(format!("group {group} has no common joint")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(posture_seed(seed, group));
    let mut plant = cfg.plant_for(seed);
    let mut home = cfg.plant.initial_posture;
    home[LEFT_ELBOW] = -90f64.to_radians();
    home[RIGHT_ELBOW] = -90f64.to_radians();
    plant.initial_posture = home;
    let mut rig = Rig::new(plant.clone(), cfg.estimator.clone(), cfg.excitation.clone())?;
    let avg = cfg.estimator.average_window;
    let (move_time, hold_time) = cfg.motion_script.first().map(|s| (s.move_time, s.hold_time)).unwrap_or((3.0, 5.0));
    rig.hold(cfg.initial_hold)?;
    let mut stops = vec![rig.e_ave(avg)?];
    for trial in 2..=cfg.sweep.posture_trials {
        let target = if trial % 2 == 0 {
            let mut t = home;
            for &j in &joints {
                let [lo, hi] = plant.joint_limits[j];
                t[j] = rng.random_range(lo..=hi);
            }
            t
        } else {
            home
        };
        rig.move_to(&target, move_time)?;
        rig.hold(hold_time)?;
        stops.push(rig.e_ave(avg)?);
    }
    let (_, timeline, _) = rig.into_parts();
    Ok(RunRecord { label: group.to_string(), seed, timeline, stops })
}

fn posture_report(cfg: &ScenarioConfig, group: &GroupName) -> Result<ExperimentReport, ScenarioError> {
    let mut runs = Vec::new();
    for &seed in &cfg.seeds {
        runs.push(run_posture(cfg, group, seed)?);
    }
    let metrics = runs
        .iter()
        .map(|r| RunMetric { label: r.label.clone(), seed: r.seed, name: "return_change".into(), value: return_change(&r.values()) })
        .collect();
    let mut report = ExperimentReport::from_runs(format!("move {group}"), runs);
    report.metrics = metrics;
    Ok(report)
}

/// Outcome of one lean against one environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtensionAttempt {
    pub environment: String,
    pub report: ProbeReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtensionTrace {
    pub seed: u64,
    pub attempts: Vec<ExtensionAttempt>,
    /// index into the offered environments of the one leaned on
    pub chosen: usize,
    pub decision: String,
}

/// Home posture of the extension and bracing scripts: both elbows at -90°.
fn upright(plant: &PlantConfig) -> JointVector {
    let mut home = plant.initial_posture;
    home[LEFT_ELBOW] = -90f64.to_radians();
    home[RIGHT_ELBOW] = -90f64.to_radians();
    home
}

fn lean_targets(cfg: &ScenarioConfig) -> (JointVector, JointVector, JointVector) {
    let home = upright(&cfg.plant);
    let mut end = home;
    end[LEFT_SHOULDER] = cfg.extension.lean;
    let mut touch = home;
    touch[LEFT_SHOULDER] = home[LEFT_SHOULDER] + cfg.extension.contact_fraction * (cfg.extension.lean - home[LEFT_SHOULDER]);
    (home, touch, end)
}

/// Tries the offered environments in order for one seed. A rejected
/// environment is released after moving back home.
pub fn run_extension_seed(cfg: &ScenarioConfig, seed: u64) -> Result<ExtensionTrace, ScenarioError> {
    let (home, touch, end) = lean_targets(cfg);
    let plant = PlantConfig { initial_posture: home, ..cfg.plant_for(seed) };
    let mut rig = Rig::new(plant.clone(), cfg.estimator.clone(), cfg.excitation.clone())?;
    rig.hold(cfg.initial_hold)?;
    let mut attempts = Vec::new();
    for (i, env) in cfg.extension.environments.iter().enumerate() {
        let env = place_surface(env.clone().at(Site::LeftHand, 0.0), &plant, &touch);
        rig.plant_mut().attach_environment(env.clone(), Site::LeftHand)?;
        let report = probe_run(&mut rig, &cfg.probe.timing, &end, cfg.probe.threshold)?;
        let accepted = report.verdict == Verdict::Stable;
        attempts.push(ExtensionAttempt { environment: format!("env-{}", i + 1), report });
        if accepted {
            return Ok(ExtensionTrace { seed, attempts, chosen: i, decision: "lean".into() });
        }
        rig.move_to(&home, cfg.probe.timing.move_)?;
        rig.plant_mut().detach_environment(Site::LeftHand)?;
        rig.hold(cfg.probe.timing.settle)?;
    }
    Err(ScenarioError::NoStableEnvironment)
}

/// Motion extension over every seed.
pub fn run_motion_extension(cfg: &ScenarioConfig) -> Result<Vec<ExtensionTrace>, ScenarioError> {
    cfg.validate()?;
    cfg.seeds.iter().map(|&s| run_extension_seed(cfg, s)).collect()
}

/// Single probe of the first extension environment (or none).
pub fn run_probe(cfg: &ScenarioConfig, seed: u64) -> Result<ProbeReport, ScenarioError> {
    cfg.validate()?;
    let (home, touch, end) = lean_targets(cfg);
    let plant = PlantConfig { initial_posture: home, ..cfg.plant_for(seed) };
    let mut rig = Rig::new(plant.clone(), cfg.estimator.clone(), cfg.excitation.clone())?;
    rig.hold(cfg.initial_hold)?;
    if let Some(env) = cfg.extension.environments.first() {
        let env = place_surface(env.clone().at(Site::LeftHand, 0.0), &plant, &touch);
        rig.plant_mut().attach_environment(env, Site::LeftHand)?;
    }
    Ok(probe_run(&mut rig, &cfg.probe.timing, &end, cfg.probe.threshold)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftSample {
    pub seed: u64,
    pub braced: bool,
    /// mm, hand displacement at each cycle end from the first cycle end
    pub cycle_drift: Vec<f64>,
    /// mm
    pub final_drift: f64,
    /// mm
    pub rms_drift: f64,
    /// probe of the lean onto the table, braced runs only
    pub probe: Option<ProbeReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub samples: Vec<DriftSample>,
}

impl DriftReport {
    pub fn pair(&self, seed: u64) -> Option<(&DriftSample, &DriftSample)> {
        let find = |b: bool| self.samples.iter().find(|s| s.seed == seed && s.braced == b);
        Some((find(false)?, find(true)?))
    }
}

fn stroke_scale(seed: u64, jitter: f64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    1.0 + jitter * rng.random_range(-1.0..=1.0)
}

pub fn run_bracing_seed(cfg: &ScenarioConfig, seed: u64, braced: bool) -> Result<DriftSample, ScenarioError> {
    let b = &cfg.bracing;
    let mut home = upright(&cfg.plant);
    home[RIGHT_ELBOW] = b.stroke_from;
    home[LEFT_SHOULDER] = b.lifted_shoulder;
    let plant = PlantConfig { initial_posture: home, ..cfg.plant_for(seed) };
    let vibration = if b.excite { cfg.excitation.clone() } else { VibrationCommand { enabled: false, ..cfg.excitation.clone() } };
    let mut rig = Rig::new(plant.clone(), cfg.estimator.clone(), vibration)?;
    rig.hold(cfg.initial_hold)?;
    let mut probe = None;
    if braced {
        let mut rest = home;
        rest[LEFT_SHOULDER] = b.braced_shoulder;
        let table = place_surface(b.table.clone().at(Site::LeftElbow, 0.0), &plant, &rest);
        let table = EnvironmentModel { surface_height: table.surface_height + b.table_press, ..table };
        rig.plant_mut().attach_environment(table, Site::LeftElbow)?;
        if b.excite {
            probe = Some(probe_run(&mut rig, &cfg.probe.timing, &rest, cfg.probe.threshold)?);
        } else {
            rig.move_to(&rest, cfg.probe.timing.move_)?;
        }
    } else if b.excite {
        rig.hold(cfg.probe.timing.total())?;
    } else {
        rig.hold(cfg.probe.timing.move_)?;
    }
    rig.hold(b.settle)?;
    let period = b.swing_time + b.return_time;
    let cycles = if period > 0.0 { (b.duration / period + 1e-9).floor() as usize } else { 0 };
    let scale = stroke_scale(seed, b.stroke_jitter);
    let mut reference: Option<[f64; 2]> = None;
    let mut cycle_drift = Vec::with_capacity(cycles);
    for _ in 0..cycles {
        let mut th = rig.joint_target();
        th[RIGHT_ELBOW] = b.stroke_from + (b.stroke_to - b.stroke_from) * scale;
        rig.move_to(&th, b.swing_time)?;
        th[RIGHT_ELBOW] = b.stroke_from;
        rig.move_to(&th, b.return_time)?;
        let p = rig.plant().end_effector_pose(Arm::Right);
        let r = *reference.get_or_insert(p);
        cycle_drift.push(((p[0] - r[0]).powi(2) + (p[1] - r[1]).powi(2)).sqrt());
    }
    let final_drift = cycle_drift.last().copied().unwrap_or(0.0);
    let rms_drift = if cycle_drift.is_empty() {
        0.0
    } else {
        (cycle_drift.iter().map(|d| d * d).sum::<f64>() / cycle_drift.len() as f64).sqrt()
    };
    Ok(DriftSample { seed, braced, cycle_drift, final_drift, rms_drift, probe })
}

/// Braced and unbraced stroke runs for every seed.
pub fn run_bracing(cfg: &ScenarioConfig) -> Result<DriftReport, ScenarioError> {
    cfg.validate()?;
    let mut samples = Vec::new();
    for &seed in &cfg.seeds {
        samples.push(run_bracing_seed(cfg, seed, false)?);
        samples.push(run_bracing_seed(cfg, seed, true)?);
    }
    Ok(DriftReport { samples })
}
