//! Vibration propagation estimator.
//!
//! Each observed muscle keeps a ring buffer of its last `T` tension samples.
//! At the update rate the band peak of every buffer is taken, the group is
//! reduced with a trimmed mean and the result is smoothed exponentially.

pub mod aggregate;
pub mod spectrum;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::plant::PlantConfig;
use crate::types::{GroupName, MuscleGroup, MuscleId, SensorFrame};

pub use aggregate::{ema_update, trimmed_mean, window_average, EAveSample};
pub use spectrum::{band_bins, band_peak, naive_dft_bin, Spectrum};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimatorError {
    #[error("frame has no tension for muscle {0}")]
    MissingMuscle(MuscleId),
    #[error("frame time {t} does not follow previous time {prev}")]
    NonMonotonicTime { prev: f64, t: f64 },
    #[error("estimator is not warm yet")]
    NotWarm,
    #[error("no DFT bin center inside the band")]
    EmptyBand,
    #[error("empty input")]
    EmptyInput,
    #[error("need {needed} s of data, have {have} s")]
    InsufficientData { needed: f64, have: f64 },
    #[error("window has {got} samples, expected {expected}")]
    WindowLength { expected: usize, got: usize },
    #[error("bad estimator config: {0}")]
    BadConfig(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimatorConfig {
    /// Hz, excitation frequency
    pub freq: f64,
    /// Hz
    pub f_min: f64,
    /// Hz
    pub f_max: f64,
    /// samples per window
    pub window: usize,
    /// Hz
    pub sample_rate: f64,
    /// Hz
    pub update_rate: f64,
    pub alpha: f64,
    pub trim_high: usize,
    pub trim_low: usize,
    pub group_o: MuscleGroup,
    /// s, span of the E^ave mean
    pub average_window: f64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            freq: 12.5,
            f_min: 10.5,
            f_max: 14.5,
            window: 40,
            sample_rate: 125.0,
            update_rate: 20.0,
            alpha: 0.1,
            trim_high: 2,
            trim_low: 2,
            group_o: PlantConfig::default().group(&GroupName::DL),
            average_window: 1.0,
        }
    }
}

impl EstimatorConfig {
    /// Sets the excitation frequency with the usual ±2 Hz band.
    pub fn with_freq(mut self, freq: f64) -> Self {
        self.freq = freq;
        self.f_min = freq - 2.0;
        self.f_max = freq + 2.0;
        self
    }

    pub fn validate(&self) -> Result<(), EstimatorError> {
        let bad = |s: &str| Err(EstimatorError::BadConfig(s.to_string()));
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad("alpha must be in (0, 1]");
        }
        if self.window < 4 {
            return bad("window must hold at least 4 samples");
        }
        if !(self.f_min <= self.freq && self.freq <= self.f_max) {
            return bad("band must contain the excitation frequency");
        }
        if !(self.sample_rate > 0.0) || !(self.update_rate > 0.0) || self.update_rate > self.sample_rate {
            return bad("need 0 < update_rate <= sample_rate");
        }
        if self.group_o.is_empty() {
            return bad("observation group is empty");
        }
        if !(self.average_window > 0.0) {
            return bad("average_window must be > 0");
        }
        if band_bins(self.window, self.sample_rate, self.f_min, self.f_max).is_empty() {
            return Err(EstimatorError::EmptyBand);
        }
        Ok(())
    }

    /// Window duration in seconds.
    pub fn window_duration(&self) -> f64 {
        self.window as f64 / self.sample_rate
    }
}

/// One estimator update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ETimelineRow {
    pub t: f64,
    pub e_raw: f64,
    pub e: f64,
}

/// Ring buffers and smoothed value of one estimator instance.
#[derive(Debug, Clone)]
pub struct EstimatorState {
    pub buffers: Vec<VecDeque<f64>>,
    pub e: f64,
    pub warm: bool,
    last_t: Option<f64>,
    frames: u64,
    spectrum: Spectrum,
    bins: Vec<usize>,
}

impl EstimatorState {
    pub fn new(config: &EstimatorConfig) -> Result<Self, EstimatorError> {
        config.validate()?;
        Ok(Self {
            buffers: vec![VecDeque::with_capacity(config.window); config.group_o.len()],
            e: 0.0,
            warm: false,
            last_t: None,
            frames: 0,
            spectrum: Spectrum::new(config.window),
            bins: band_bins(config.window, config.sample_rate, config.f_min, config.f_max),
        })
    }

    /// Frames accepted so far.
    pub fn frames(&self) -> u64 {
        self.frames
    }
}

/// Appends one frame's tensions of the observed muscles. Leaves `E` alone.
pub fn push_frame(state: &mut EstimatorState, frame: &SensorFrame, config: &EstimatorConfig) -> Result<(), EstimatorError> {
    if let Some(prev) = state.last_t {
        if !(frame.t > prev) {
            return Err(EstimatorError::NonMonotonicTime { prev, t: frame.t });
        }
    }
    let mut values = Vec::with_capacity(config.group_o.len());
    for &id in &config.group_o.members {
        values.push(frame.tension(id).ok_or(EstimatorError::MissingMuscle(id))?);
    }
    for (buf, v) in state.buffers.iter_mut().zip(values) {
        if buf.len() == config.window {
            buf.pop_front();
        }
        buf.push_back(v);
    }
    state.last_t = Some(frame.t);
    state.frames += 1;
    state.warm = state.buffers.iter().all(|b| b.len() == config.window);
    Ok(())
}

/// Band peak of every observed muscle, in group order.
pub fn compute_h(state: &mut EstimatorState, config: &EstimatorConfig) -> Result<Vec<(MuscleId, f64)>, EstimatorError> {
    if !state.warm {
        return Err(EstimatorError::NotWarm);
    }
    let mut window = vec![0.0; config.window];
    let mut out = Vec::with_capacity(state.buffers.len());
    for (id, buf) in config.group_o.members.iter().zip(&state.buffers) {
        for (w, v) in window.iter_mut().zip(buf) {
            *w = *v;
        }
        out.push((*id, state.spectrum.band_peak(&window, &state.bins)?));
    }
    Ok(out)
}

/// Updates `E` from the current buffers and returns the new row values
/// `(E_raw, E)`.
pub fn estimator_step(state: &mut EstimatorState, config: &EstimatorConfig) -> Result<(f64, f64), EstimatorError> {
    let h: Vec<f64> = compute_h(state, config)?.into_iter().map(|(_, v)| v).collect();
    let e_raw = trimmed_mean(&h, config.trim_high, config.trim_low)?;
    state.e = ema_update(state.e, e_raw, config.alpha);
    Ok((e_raw, state.e))
}

/// Whether the update clock ticks on the `n`-th frame (1-based): it does when
/// `floor(n · update_rate / sample_rate)` increments.
pub fn update_due(n: u64, config: &EstimatorConfig) -> bool {
    if n == 0 {
        return false;
    }
    let ratio = config.update_rate / config.sample_rate;
    let slot = |k: u64| (k as f64 * ratio + 1e-9).floor() as u64;
    slot(n) > slot(n - 1)
}

/// Streaming estimator used both live and on replayed logs.
#[derive(Debug, Clone)]
pub struct Estimator {
    config: EstimatorConfig,
    state: EstimatorState,
}

impl Estimator {
    pub fn new(config: EstimatorConfig) -> Result<Self, EstimatorError> {
        let state = EstimatorState::new(&config)?;
        Ok(Self { config, state })
    }

    pub fn config(&self) -> &EstimatorConfig {
        &self.config
    }

    pub fn state(&self) -> &EstimatorState {
        &self.state
    }

    pub fn e(&self) -> f64 {
        self.state.e
    }

    /// Ingests a frame; returns a timeline row when an update fired.
    /// Update ticks before warm-up are skipped.
    pub fn push(&mut self, frame: &SensorFrame) -> Result<Option<ETimelineRow>, EstimatorError> {
        push_frame(&mut self.state, frame, &self.config)?;
        if !update_due(self.state.frames, &self.config) || !self.state.warm {
            return Ok(None);
        }
        let (e_raw, e) = estimator_step(&mut self.state, &self.config)?;
        Ok(Some(ETimelineRow { t: frame.t, e_raw, e }))
    }
}
