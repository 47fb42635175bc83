use vibroprobe_core::probe::Verdict;
use vibroprobe_core::scenario::{run_bracing, run_exp1, run_motion_extension, run_probe, run_staircase, run_sweep};
use vibroprobe_core::{EnvironmentModel, ScenarioConfig, ScenarioError, SweepDimension};

const TICK: f64 = 1.0 / 125.0;

fn two_seeds() -> ScenarioConfig {
    ScenarioConfig { seeds: vec![1, 2], repeats: 2, ..ScenarioConfig::default() }
}

#[test]
fn staircase_holds_and_moves_follow_the_script() {
    let cfg = ScenarioConfig::default();
    let run = run_staircase(&cfg, &EnvironmentModel::none(), 1, "None", false).unwrap();
    let ends: Vec<f64> = run.record.stops.iter().map(|s| s.t_end).collect();
    assert!((ends[0] - cfg.initial_hold).abs() <= TICK);
    for (w, seg) in ends.windows(2).zip(&cfg.motion_script) {
        assert!((w[1] - w[0] - seg.move_time - seg.hold_time).abs() <= TICK, "{w:?}");
    }
    for s in &run.record.stops {
        assert!((s.t_end - s.t_start - 1.0).abs() <= TICK);
    }
    // the estimator reports at 20 Hz
    let dt: Vec<f64> = run.record.timeline.windows(2).map(|w| w[1].t - w[0].t).collect();
    assert!(dt.iter().all(|d| (d - 0.05).abs() <= TICK), "{:?}", &dt[..5]);
}

#[test]
fn probe_phases_are_one_three_two_one() {
    let cfg = ScenarioConfig::default();
    let r = run_probe(&cfg, 1).unwrap();
    assert!((r.e1.t_end - r.e1.t_start - 1.0).abs() <= TICK);
    assert!((r.e2.t_end - r.e2.t_start - 1.0).abs() <= TICK);
    // move 3 s, settle 2 s, measure 1 s after the first window
    assert!((r.e2.t_end - r.e1.t_end - 6.0).abs() <= TICK);
    assert_eq!(r.verdict, if r.s < r.threshold { Verdict::Stable } else { Verdict::NotStable });
}

#[test]
fn reports_are_reproducible() {
    let cfg = two_seeds();
    assert_eq!(run_exp1(&cfg).unwrap(), run_exp1(&cfg).unwrap());
}

#[test]
fn free_arm_is_flat_and_rigid_frame_falls_off() {
    let report = run_exp1(&ScenarioConfig::default()).unwrap();
    let none = &report.series("None").unwrap().mean;
    let (lo, hi) = none.iter().fold((f64::INFINITY, 0.0f64), |(l, h), v| (l.min(*v), h.max(*v)));
    assert!(hi < 1.25 * lo, "None {none:?}");
    let stable = &report.series("Stable").unwrap().mean;
    assert!(stable.windows(2).all(|w| w[1] < w[0]), "Stable {stable:?}");
    for s in &report.stats {
        assert_eq!(s.mean.len(), 4);
        assert!(s.std_dev.iter().all(|d| d.is_some()));
    }
}

#[test]
fn one_seed_has_no_spread() {
    let cfg = ScenarioConfig { seeds: vec![3], repeats: 1, ..ScenarioConfig::default() };
    let report = run_exp1(&cfg).unwrap();
    assert!(report.stats.iter().all(|s| s.std_dev.iter().all(|d| d.is_none())));
}

#[test]
fn extension_commits_only_to_stable_environments() {
    let traces = run_motion_extension(&two_seeds()).unwrap();
    for t in &traces {
        let (last, rejected) = t.attempts.split_last().unwrap();
        assert_eq!(t.chosen, t.attempts.len() - 1);
        assert_eq!(last.report.verdict, Verdict::Stable);
        assert!(rejected.iter().all(|a| a.report.verdict == Verdict::NotStable));
        assert_eq!(last.environment, "env-2");
    }
}

#[test]
fn flimsy_environments_are_all_refused() {
    let mut cfg = ScenarioConfig { seeds: vec![1], repeats: 1, ..ScenarioConfig::default() };
    let rod = cfg.extension.environments[0].clone();
    cfg.extension.environments = vec![rod.clone(), rod];
    assert!(matches!(run_motion_extension(&cfg), Err(ScenarioError::NoStableEnvironment)));
}

#[test]
fn zero_length_bracing_has_no_drift() {
    let mut cfg = ScenarioConfig { seeds: vec![1], repeats: 1, ..ScenarioConfig::default() };
    cfg.bracing.duration = 0.0;
    let report = run_bracing(&cfg).unwrap();
    assert_eq!(report.samples.len(), 2);
    for s in &report.samples {
        assert!(s.cycle_drift.is_empty());
        assert_eq!(s.final_drift, 0.0);
    }
}

#[test]
fn bracing_runs_twenty_strokes() {
    let cfg = ScenarioConfig { seeds: vec![2], repeats: 1, ..ScenarioConfig::default() };
    let report = run_bracing(&cfg).unwrap();
    let (free, braced) = report.pair(2).unwrap();
    assert_eq!(free.cycle_drift.len(), 20);
    assert_eq!(free.cycle_drift[0], 0.0);
    assert!(free.probe.is_none() && braced.probe.is_some());
}

#[test]
fn grouping_sweep_covers_every_pairing() {
    let cfg = ScenarioConfig { seeds: vec![1], repeats: 1, ..ScenarioConfig::default() };
    let reports = run_sweep(&cfg, SweepDimension::Grouping).unwrap();
    assert_eq!(reports.len(), cfg.sweep.groupings.len());
    for (r, g) in reports.iter().zip(&cfg.sweep.groupings) {
        assert_eq!(r.name, g.label());
        assert!(r.stats.iter().all(|s| s.mean.iter().all(|v| v.is_finite() && *v >= 0.0)));
    }
    // vibrating the observed group itself dwarfs anything propagated
    let same = reports.iter().find(|r| r.name == "V=DL,O=DL").unwrap();
    let cross = reports.iter().find(|r| r.name == "V=UR,O=DL").unwrap();
    let (same_none, cross_none) = (same.series("None").unwrap(), cross.series("None").unwrap());
    assert!(same_none.mean.iter().zip(&cross_none.mean).all(|(a, b)| *a > 5.0 * b), "{:?} {:?}", same_none.mean, cross_none.mean);
}

#[test]
fn mismatched_repeats_are_rejected() {
    let cfg = ScenarioConfig { repeats: 4, ..ScenarioConfig::default() };
    assert!(matches!(run_exp1(&cfg), Err(ScenarioError::BadConfig(_))));
}
