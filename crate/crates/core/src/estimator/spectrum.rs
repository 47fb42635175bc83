//! Band-limited spectral peak of a tension window.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::EstimatorError;

/// Bins `k <= T/2` whose center frequency lies in `[f_min, f_max]`.
pub fn band_bins(len: usize, sample_rate: f64, f_min: f64, f_max: f64) -> Vec<usize> {
    let width = sample_rate / len as f64;
    let eps = 1e-9 * f_max.abs().max(1.0);
    (0..=len / 2)
        .filter(|&k| {
            let center = k as f64 * width;
            center >= f_min - eps && center <= f_max + eps
        })
        .collect()
}

/// Direct-summation DFT magnitude `|Σ x_n e^{-i2πkn/T}|`.
pub fn naive_dft_bin(window: &[f64], k: usize) -> f64 {
    let len = window.len();
    let (mut re, mut im) = (0.0, 0.0);
    for (n, x) in window.iter().enumerate() {
        // reduce k·n first so the angle stays small and exact
        let phase = 2.0 * PI * ((k * n) % len) as f64 / len as f64;
        re += x * phase.cos();
        im -= x * phase.sin();
    }
    re.hypot(im)
}

/// Reusable FFT plan for windows of one length.
#[derive(Clone)]
pub struct Spectrum {
    len: usize,
    fft: Arc<dyn Fft<f64>>,
    buf: Vec<Complex<f64>>,
    scratch: Vec<Complex<f64>>,
}

impl std::fmt::Debug for Spectrum {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectrum").field("len", &self.len).finish()
    }
}

impl Spectrum {
    pub fn new(len: usize) -> Self {
        let fft = FftPlanner::new().plan_fft_forward(len);
        let scratch = vec![Complex::default(); fft.get_inplace_scratch_len()];
        Self { len, fft, buf: vec![Complex::default(); len], scratch }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Unnormalized magnitude of every bin.
    pub fn magnitudes(&mut self, window: &[f64]) -> Result<Vec<f64>, EstimatorError> {
        self.transform(window)?;
        Ok(self.buf.iter().map(|c| c.norm()).collect())
    }

    fn transform(&mut self, window: &[f64]) -> Result<(), EstimatorError> {
        if window.len() != self.len {
            return Err(EstimatorError::WindowLength { expected: self.len, got: window.len() });
        }
        for (b, x) in self.buf.iter_mut().zip(window) {
            *b = Complex::new(*x, 0.0);
        }
        self.fft.process_with_scratch(&mut self.buf, &mut self.scratch);
        Ok(())
    }

    /// Largest bin magnitude in the band.
    pub fn band_peak(&mut self, window: &[f64], bins: &[usize]) -> Result<f64, EstimatorError> {
        if bins.is_empty() {
            return Err(EstimatorError::EmptyBand);
        }
        self.transform(window)?;
        Ok(bins.iter().map(|&k| self.buf[k].norm()).fold(0.0, f64::max))
    }
}

/// Peak magnitude over the DFT bins whose centers fall in `[f_min, f_max]`,
/// with a rectangular window and no normalization.
pub fn band_peak(window: &[f64], sample_rate: f64, f_min: f64, f_max: f64) -> Result<f64, EstimatorError> {
    let bins = band_bins(window.len(), sample_rate, f_min, f_max);
    if bins.is_empty() {
        return Err(EstimatorError::EmptyBand);
    }
    Spectrum::new(window.len()).band_peak(window, &bins)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tone(amp: f64, freq: f64, len: usize, rate: f64) -> Vec<f64> {
        (0..len).map(|n| amp * (2.0 * PI * freq * n as f64 / rate).sin()).collect()
    }

    #[test]
    fn on_bin_tone() {
        let w = tone(1.0, 12.5, 40, 125.0);
        assert!((band_peak(&w, 125.0, 10.5, 14.5).unwrap() - 20.0).abs() < 1e-9);
        assert!((naive_dft_bin(&w, 4) - 20.0).abs() < 1e-9);
        let w3 = tone(3.0, 12.5, 40, 125.0);
        assert!((band_peak(&w3, 125.0, 10.5, 14.5).unwrap() - 60.0).abs() < 1e-9);
    }

    #[test]
    fn constant_window_has_nothing_in_band() {
        let w = vec![7.0; 40];
        assert!(band_peak(&w, 125.0, 10.5, 14.5).unwrap().abs() < 1e-9);
        assert!((band_peak(&w, 125.0, 0.0, 14.5).unwrap() - 280.0).abs() < 1e-9);
    }

    #[test]
    fn band_edges_are_inclusive() {
        assert_eq!(band_bins(40, 125.0, 12.5, 12.5), vec![4]);
        assert_eq!(band_bins(40, 125.0, 9.375, 15.625), vec![3, 4, 5]);
        assert!(band_bins(40, 125.0, 13.0, 15.0).is_empty());
        assert_eq!(band_peak(&[0.0; 40], 125.0, 13.0, 15.0), Err(EstimatorError::EmptyBand));
    }

    #[test]
    fn zero_window() {
        assert_eq!(naive_dft_bin(&[0.0; 40], 7), 0.0);
    }

    #[test]
    fn wrong_length_rejected() {
        let mut s = Spectrum::new(40);
        assert!(matches!(s.magnitudes(&[0.0; 39]), Err(EstimatorError::WindowLength { .. })));
    }
}
