//! Acceptance suite. Runs every criterion, prints one line each and exits
//! non-zero if any fails.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vibroprobe_core::estimator::{
    band_bins, band_peak, compute_h, ema_update, naive_dft_bin, trimmed_mean, EstimatorState, Spectrum,
};
use vibroprobe_core::io::{format_timeline, replay_estimate, write_log, LogHeader, SensorLog};
use vibroprobe_core::probe::{classify, stability_ratio};
use vibroprobe_core::scenario::{
    run_bracing, run_exp1, run_motion_extension, run_staircase, run_sweep, ExperimentReport, ScenarioConfig,
};
use vibroprobe_core::{EAveSample, EnvironmentKind, EnvironmentModel, EstimatorConfig, GroupName, Rig, SweepDimension, Verdict};

type Check = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

/// Direct O(T²) DFT magnitude written independently of the library.
fn reference_dft(x: &[f64], k: usize) -> f64 {
    let n = x.len() as f64;
    let (mut re, mut im) = (0.0, 0.0);
    for (i, v) in x.iter().enumerate() {
        let a = -2.0 * PI * k as f64 * i as f64 / n;
        re += v * a.cos();
        im += v * a.sin();
    }
    (re * re + im * im).sqrt()
}

fn c1_dft_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut spec = Spectrum::new(40);
    let bins = band_bins(40, 125.0, 10.5, 14.5);
    let mut worst: f64 = 0.0;
    let mut worst_ref: f64 = 0.0;
    for _ in 0..1000 {
        let x: Vec<f64> = (0..40).map(|_| rng.random_range(-50.0..50.0)).collect();
        let fast = spec.magnitudes(&x).unwrap();
        for (k, f) in fast.iter().enumerate() {
            let slow = naive_dft_bin(&x, k);
            worst = worst.max((f - slow).abs() / slow.abs().max(1e-300));
            let r = reference_dft(&x, k);
            worst_ref = worst_ref.max((slow - r).abs() / r.abs().max(1e-300));
        }
        let peak = spec.band_peak(&x, &bins).unwrap();
        let slow_peak = bins.iter().map(|&k| naive_dft_bin(&x, k)).fold(f64::NEG_INFINITY, f64::max);
        worst = worst.max((peak - slow_peak).abs() / slow_peak);
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-9 && worst_ref <= 1e-9 && secs < 5.0,
        format!("max rel err fast/naive {worst:.2e}, naive/reference {worst_ref:.2e}, {secs:.2} s"),
    )
}

fn c2_tone_recovery() -> Outcome {
    let mut errs = Vec::new();
    let mut h1 = 0.0;
    let mut linear = true;
    for b in [0.5, 1.0, 3.0] {
        let x: Vec<f64> = (0..40).map(|n| b * (2.0 * PI * 12.5 * n as f64 / 125.0).sin()).collect();
        let h = band_peak(&x, 125.0, 10.5, 14.5).unwrap();
        errs.push(((h - 20.0 * b) / (20.0 * b)).abs());
        if b == 1.0 {
            h1 = h;
        }
        if b == 3.0 && ((h - 3.0 * h1) / h).abs() > 1e-3 {
            linear = false;
        }
    }
    let worst = errs.iter().cloned().fold(0.0, f64::max);
    outcome(worst <= 1e-3 && linear, format!("max rel err vs 20B {worst:.2e}, linear {linear}"))
}

fn c3_pipeline_units() -> Outcome {
    let mut fails = Vec::new();
    let mut check = |name: &str, ok: bool| {
        if !ok {
            fails.push(name.to_string());
        }
    };
    check("trim 4.5", trimmed_mean(&[1., 2., 3., 4., 5., 6., 7., 8.], 2, 2).unwrap() == 4.5);
    check("trim 5", trimmed_mean(&[5.0; 8], 2, 2).unwrap() == 5.0);
    check("trim fallback", trimmed_mean(&[10., 20., 30.], 2, 2).unwrap() == 20.0);
    for alpha in [0.1, 0.5, 1.0] {
        let c = 7.3;
        let mut e = 0.0;
        for n in 1..=200 {
            e = ema_update(e, c, alpha);
            let closed = c * (1.0 - (1.0f64 - alpha).powi(n));
            check("ema closed form", (e - closed).abs() <= 1e-12);
        }
    }
    let s = |v: f64| EAveSample { t_start: 0.0, t_end: 1.0, value: v };
    check("S=1", stability_ratio(&s(3.0), &s(3.0)).unwrap() == 1.0);
    check("S=0.524", stability_ratio(&s(1000.0), &s(524.0)).unwrap() == 0.524);
    check("degenerate", stability_ratio(&s(0.0), &s(1.0)).is_err());
    check("0.524 stable", classify(0.524, 0.6) == Verdict::Stable);
    check("0.699 not", classify(0.699, 0.6) == Verdict::NotStable);
    check("0.6 not", classify(0.6, 0.6) == Verdict::NotStable);
    let detail = if fails.is_empty() { "all cases exact".to_string() } else { format!("failed: {}", fails.join(", ")) };
    outcome(fails.is_empty(), detail)
}

fn mean_stop(report: &ExperimentReport, label: &str, stop: usize) -> f64 {
    report.series(label).map(|s| s.mean[stop]).unwrap_or(f64::NAN)
}

fn c4_exp1_ordering() -> Outcome {
    let start = Instant::now();
    let report = run_exp1(&ScenarioConfig::default()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let deep = 3;
    let light = 1;
    let none_deep = mean_stop(&report, "None", deep);
    let stable = mean_stop(&report, "Stable", deep);
    let none_light = mean_stop(&report, "None", light);
    let unstable = mean_stop(&report, "Unstable", light);
    let cyl = mean_stop(&report, "Cylinder", deep);
    let pass = stable < 0.6 * none_deep && unstable > none_light && cyl >= 0.9 * none_deep && secs < 120.0;
    let traj: Vec<String> = report
        .stats
        .iter()
        .map(|s| format!("{} [{}]", s.label, s.mean.iter().map(|v| format!("{v:.1}")).collect::<Vec<_>>().join(" ")))
        .collect();
    outcome(
        pass,
        format!(
            "Stable/None {:.2}, Unstable(light) {unstable:.1} vs None {none_light:.1}, Cylinder/None {:.2}, {secs:.1} s; {}",
            stable / none_deep,
            cyl / none_deep,
            traj.join("; ")
        ),
    )
}

/// Per-seed None E^ave at every hold.
fn none_runs(report: &ExperimentReport) -> Vec<(u64, Vec<f64>)> {
    report.runs_of("None").map(|r| (r.seed, r.values())).collect()
}

fn c5_amplitude() -> Outcome {
    let reports = run_sweep(&ScenarioConfig::default(), SweepDimension::Amplitude).unwrap();
    let by_a: Vec<Vec<(u64, Vec<f64>)>> = reports.iter().map(none_runs).collect();
    let mut pass = true;
    let mut lines = Vec::new();
    for s in 0..by_a[0].len() {
        let seed = by_a[0][s].0;
        for stop in 0..by_a[0][s].1.len() {
            let e: Vec<f64> = by_a.iter().map(|runs| runs[s].1[stop]).collect();
            let ok = e[3] > e[2] && e[2] > e[1] && e[1] <= 2.0 * e[0];
            pass &= ok;
            if stop == 0 {
                lines.push(format!("seed {seed}: {:.1}/{:.1}/{:.1}/{:.1}", e[0], e[1], e[2], e[3]));
            }
        }
    }
    outcome(pass, format!("A=0/1/2/3 at the first hold, all holds checked: {}", lines.join(", ")))
}

fn c6_frequency() -> Outcome {
    let base = ScenarioConfig::default();
    let mut pass = true;
    let mut lines = Vec::new();
    for f in [12.5, 25.0] {
        let cfg = base.with_frequency(f);
        let env = EnvironmentModel::none();
        let mut quiet = cfg.clone();
        quiet.excitation.amplitude = 0.0;
        for &seed in &cfg.seeds {
            let floor = run_staircase(&quiet, &env, seed, "floor", false).unwrap().record.values();
            let e = run_staircase(&cfg, &env, seed, "A=3", false).unwrap().record.values();
            for (v, fl) in e.iter().zip(&floor) {
                let ok = if f == 25.0 { *v < 2.0 * fl } else { *v > 5.0 * fl };
                pass &= ok;
            }
            lines.push(format!("F={f} seed {seed}: {:.2}x", e[0] / floor[0]));
        }
    }
    outcome(pass, format!("E^ave over floor at the first hold: {}", lines.join(", ")))
}

fn c7_extension() -> Outcome {
    let start = Instant::now();
    let cfg = ScenarioConfig { seeds: (1..=10).collect(), repeats: 10, ..ScenarioConfig::default() };
    let mut env1 = Vec::new();
    let mut env2 = Vec::new();
    let mut pass = true;
    match run_motion_extension(&cfg) {
        Ok(traces) => {
            for t in &traces {
                let s: Vec<f64> = t.attempts.iter().map(|a| a.report.s).collect();
                pass &= s.len() == 2 && s[0] >= 0.6 && s[1] < 0.6 && t.chosen == 1;
                env1.push(s[0]);
                if let Some(v) = s.get(1) {
                    env2.push(*v);
                }
            }
        }
        Err(e) => return outcome(false, format!("run failed: {e}")),
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs < 60.0;
    let fmt = |v: &[f64]| v.iter().map(|s| format!("{s:.3}")).collect::<Vec<_>>().join(" ");
    outcome(pass, format!("S env-1 [{}], S env-2 [{}], {secs:.1} s", fmt(&env1), fmt(&env2)))
}

fn c8_bracing() -> Outcome {
    let cfg = ScenarioConfig::default();
    let report = run_bracing(&cfg).unwrap();
    let mut good = 0;
    let mut lines = Vec::new();
    for &seed in &cfg.seeds {
        let (u, b) = report.pair(seed).unwrap();
        if b.final_drift < 0.5 * u.final_drift {
            good += 1;
        }
        lines.push(format!("seed {seed}: {:.2}/{:.2} mm", b.final_drift, u.final_drift));
    }
    outcome(good >= 4, format!("{good}/5 seeds braced < 50% of unbraced; braced/unbraced {}", lines.join(", ")))
}

fn c9_hysteresis() -> Outcome {
    let cfg = ScenarioConfig::default();
    let v_name = cfg.excitation.group_v.name.clone();
    let reports = run_sweep(&cfg, SweepDimension::Posture).unwrap();
    let change = |group: &GroupName, seed: u64| -> f64 {
        let label = group.to_string();
        reports
            .iter()
            .flat_map(|r| r.metrics.iter())
            .find(|m| m.label == label && m.seed == seed)
            .map(|m| m.value)
            .unwrap_or(f64::NAN)
    };
    let mut pass = true;
    let mut lines = Vec::new();
    for &seed in &cfg.seeds {
        let v = change(&v_name, seed);
        let others = cfg.sweep.posture_groups.iter().filter(|g| **g != v_name).map(|g| change(g, seed)).fold(0.0, f64::max);
        pass &= v >= 2.0 * others;
        lines.push(format!("seed {seed}: {v:.3} vs {others:.3}"));
    }
    outcome(pass, format!("relative return change, V group vs largest other group: {}", lines.join(", ")))
}

fn c10_trim() -> Outcome {
    let mut pass = true;
    let mut lines = Vec::new();
    for seed in 1..=5u64 {
        let sc = ScenarioConfig::default();
        let est_cfg = EstimatorConfig::default();
        let mut rig = Rig::new(sc.plant_for(seed), est_cfg.clone(), sc.excitation.clone()).unwrap();
        rig.record();
        rig.hold(3.0).unwrap();
        let mut st = EstimatorState::new(&est_cfg).unwrap();
        for fr in rig.frames().unwrap() {
            vibroprobe_core::estimator::push_frame(&mut st, fr, &est_cfg).unwrap();
        }
        let h: Vec<f64> = compute_h(&mut st, &est_cfg).unwrap().into_iter().map(|(_, v)| v).collect();
        let offset = 10.0 * h.iter().cloned().fold(0.0, f64::max);
        let rel = |a: f64, b: f64| ((a - b) / b).abs();
        let load = |idx: &[usize]| {
            let mut loaded = h.clone();
            for &i in idx {
                loaded[i] += offset;
            }
            (
                rel(trimmed_mean(&loaded, 2, 2).unwrap(), trimmed_mean(&h, 2, 2).unwrap()),
                rel(trimmed_mean(&loaded, 0, 0).unwrap(), trimmed_mean(&h, 0, 0).unwrap()),
            )
        };
        // the statically loaded muscles are the ones already on top
        let mut order: Vec<usize> = (0..h.len()).collect();
        order.sort_by(|a, b| h[*b].total_cmp(&h[*a]));
        let (trimmed, plain) = load(&order[..2]);
        // informational: the least favourable pair
        let mut worst = 0.0f64;
        for i in 0..h.len() {
            for j in i + 1..h.len() {
                worst = worst.max(load(&[i, j]).0);
            }
        }
        pass &= trimmed < 0.05 && plain > 0.2;
        lines.push(format!("seed {seed}: {:.1}% / {:.0}% (any pair <= {:.0}%)", trimmed * 100.0, plain * 100.0, worst * 100.0));
    }
    outcome(pass, format!("change with trim 2/2 vs without, offset on the two loaded muscles: {}", lines.join(", ")))
}

fn c11_replay() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ScenarioConfig::default();
    let envs = cfg.placed_environments();
    let mut pass = true;
    let mut lines = Vec::new();
    for (i, kind) in [EnvironmentKind::None, EnvironmentKind::Stable, EnvironmentKind::Unstable].iter().enumerate() {
        let env = envs.iter().find(|e| e.kind == *kind).unwrap();
        let run = run_staircase(&cfg, env, i as u64 + 1, "replay", true).unwrap();
        let frames = run.frames.unwrap();
        let log = SensorLog {
            header: LogHeader { muscle_count: cfg.plant.muscle_count(), sample_rate: cfg.estimator.sample_rate, groups: vec![] },
            frames,
        };
        let path = dir.path().join(format!("run{i}.csv"));
        write_log(&path, &log).unwrap();
        let replay = replay_estimate(&path, &cfg.estimator).unwrap();
        let live = format_timeline(&run.record.timeline);
        let again = format_timeline(&replay.timeline);
        let same = live.as_bytes() == again.as_bytes() && !run.record.timeline.is_empty();
        pass &= same;
        lines.push(format!("{kind:?}: {} rows {}", run.record.timeline.len(), if same { "identical" } else { "differ" }));
    }
    outcome(pass, lines.join(", "))
}

fn main() {
    let criteria: [Check; 11] = [
        ("DFT oracle equivalence", c1_dft_oracle),
        ("on-bin tone recovery", c2_tone_recovery),
        ("pipeline unit suite", c3_pipeline_units),
        ("environment ordering", c4_exp1_ordering),
        ("amplitude monotonicity", c5_amplitude),
        ("frequency attenuation", c6_frequency),
        ("motion-extension decision", c7_extension),
        ("bracing drift", c8_bracing),
        ("hysteresis property", c9_hysteresis),
        ("trim robustness", c10_trim),
        ("record/replay determinism", c11_replay),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!("criterion {:>2} {:<27} {}  {}", i + 1, name, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {}/{} passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
