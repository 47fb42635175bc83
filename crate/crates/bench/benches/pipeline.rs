use std::f64::consts::PI;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use vibroprobe_core::estimator::{band_bins, naive_dft_bin, Spectrum};
use vibroprobe_core::probe::apply_vibration;
use vibroprobe_core::{Estimator, EstimatorConfig, Plant, PlantConfig, SensorFrame, VibrationCommand};

fn window() -> Vec<f64> {
    (0..40).map(|n| 20.0 + 3.0 * (2.0 * PI * 12.5 * n as f64 / 125.0).sin() + (n as f64 * 0.37).cos()).collect()
}

fn band_peak(c: &mut Criterion) {
    let x = window();
    let bins = band_bins(40, 125.0, 10.5, 14.5);
    let mut spec = Spectrum::new(40);
    c.bench_function("band_peak/fft", |b| b.iter(|| spec.band_peak(black_box(&x), &bins).unwrap()));
    c.bench_function("band_peak/naive", |b| {
        b.iter(|| bins.iter().map(|&k| naive_dft_bin(black_box(&x), k)).fold(0.0, f64::max))
    });
}

fn estimator_push(c: &mut Criterion) {
    let cfg = PlantConfig::default();
    let frames: Vec<SensorFrame> = (0..1250)
        .map(|n| {
            let t = n as f64 / 125.0;
            let f = (0..cfg.muscle_count()).map(|i| 20.0 + (2.0 * PI * 12.5 * t + i as f64).sin()).collect();
            SensorFrame { t, l_ref: vec![0.0; cfg.muscle_count()], l: vec![0.0; cfg.muscle_count()], f }.quantized()
        })
        .collect();
    c.bench_function("estimator/10s_of_frames", |b| {
        b.iter(|| {
            let mut est = Estimator::new(EstimatorConfig::default()).unwrap();
            for fr in &frames {
                black_box(est.push(fr).unwrap());
            }
            est.e()
        })
    });
}

fn plant_tick(c: &mut Criterion) {
    let mut plant = Plant::new(PlantConfig::default()).unwrap();
    let base = plant.state().l_ref.clone();
    let cmd = VibrationCommand::default();
    c.bench_function("plant/tick", |b| {
        b.iter(|| {
            let l_ref = apply_vibration(&base, plant.time(), &cmd).unwrap();
            plant.tick(&l_ref).unwrap();
            black_box(plant.sample_sensors())
        })
    });
}

criterion_group!(benches, band_peak, estimator_push, plant_tick);
criterion_main!(benches);
