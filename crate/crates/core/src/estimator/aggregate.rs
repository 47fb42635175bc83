//! Robust group averaging, smoothing and windowed means.

use serde::{Deserialize, Serialize};

use super::EstimatorError;

/// Mean of `h` after dropping the `trim_high` largest and `trim_low` smallest
/// values. Falls back to the plain mean when trimming would leave nothing.
/// Equal values are ordered by position, which only matters for
/// reproducibility since swapping equal values cannot change the mean.
pub fn trimmed_mean(h: &[f64], trim_high: usize, trim_low: usize) -> Result<f64, EstimatorError> {
    if h.is_empty() {
        return Err(EstimatorError::EmptyInput);
    }
    if trim_high + trim_low >= h.len() {
        return Ok(h.iter().sum::<f64>() / h.len() as f64);
    }
    let mut order: Vec<usize> = (0..h.len()).collect();
    order.sort_by(|&a, &b| h[b].total_cmp(&h[a]).then(a.cmp(&b)));
    let kept = &order[trim_high..h.len() - trim_low];
    Ok(kept.iter().map(|&i| h[i]).sum::<f64>() / kept.len() as f64)
}

/// One step of the exponential low-pass: `(1 - alpha) E + alpha E_raw`.
pub fn ema_update(e: f64, e_raw: f64, alpha: f64) -> f64 {
    (1.0 - alpha) * e + alpha * e_raw
}

/// Mean of a smoothed value over a closed time interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EAveSample {
    pub t_start: f64,
    pub t_end: f64,
    pub value: f64,
}

/// Mean of the samples in the last `duration` seconds of `timeline`
/// (`t_end - duration < t <= t_end`). The timeline must cover the whole
/// interval: its span plus one mean sample spacing reaches `duration`.
pub fn window_average(timeline: &[(f64, f64)], duration: f64) -> Result<EAveSample, EstimatorError> {
    let insufficient = |have: f64| EstimatorError::InsufficientData { needed: duration, have };
    let (Some(first), Some(last)) = (timeline.first(), timeline.last()) else {
        return Err(insufficient(0.0));
    };
    let n = timeline.len();
    let span = last.0 - first.0;
    let spacing = if n > 1 { span / (n - 1) as f64 } else { 0.0 };
    let covered = span + spacing;
    if n < 2 || covered < duration - 1e-9 {
        return Err(insufficient(covered));
    }
    let t_end = last.0;
    let t_start = t_end - duration;
    // tolerance against the 1e-6 timestamp grid
    let cut = t_start + 1e-9;
    let (sum, count) = timeline
        .iter()
        .filter(|(t, _)| *t > cut)
        .fold((0.0, 0usize), |(s, c), (_, e)| (s + e, c + 1));
    Ok(EAveSample { t_start, t_end, value: sum / count as f64 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trimmed_mean_examples() {
        let h: Vec<f64> = (1..=8).map(f64::from).collect();
        assert_eq!(trimmed_mean(&h, 2, 2).unwrap(), 4.5);
        assert_eq!(trimmed_mean(&[5.0; 8], 2, 2).unwrap(), 5.0);
        assert_eq!(trimmed_mean(&[10.0, 20.0, 30.0], 2, 2).unwrap(), 20.0);
        assert_eq!(trimmed_mean(&[], 2, 2), Err(EstimatorError::EmptyInput));
        assert_eq!(trimmed_mean(&[4.0, 1.0, 9.0, 2.0, 3.0], 0, 0).unwrap(), 3.8);
    }

    #[test]
    fn ema_examples() {
        assert_eq!(ema_update(0.0, 100.0, 0.1), 10.0);
        assert_eq!(ema_update(10.0, 100.0, 0.1), 19.0);
        assert_eq!(ema_update(42.0, 7.0, 1.0), 7.0);
    }

    #[test]
    fn window_average_examples() {
        let flat: Vec<_> = (1..=20).map(|i| (i as f64 * 0.05, 100.0)).collect();
        assert_eq!(window_average(&flat, 1.0).unwrap().value, 100.0);
        let ramp: Vec<_> = (0..20).map(|i| ((i + 1) as f64 * 0.05, i as f64)).collect();
        let s = window_average(&ramp, 1.0).unwrap();
        assert!((s.value - 9.5).abs() < 1e-12);
        assert!((s.t_end - s.t_start - 1.0).abs() < 1e-12);
        let short: Vec<_> = (1..=10).map(|i| (i as f64 * 0.05, 1.0)).collect();
        assert!(matches!(window_average(&short, 1.0), Err(EstimatorError::InsufficientData { .. })));
    }

    #[test]
    fn window_average_uses_only_the_tail() {
        let mut tl: Vec<_> = (1..=40).map(|i| (i as f64 * 0.05, 0.0)).collect();
        for s in tl.iter_mut().skip(20) {
            s.1 = 3.0;
        }
        assert_eq!(window_average(&tl, 1.0).unwrap().value, 3.0);
    }
}
