//! Scenario files, sensor logs, timelines, report tables and SVG charts.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde_json::Value;
use thiserror::Error;

use crate::estimator::{ETimelineRow, Estimator, EstimatorConfig, EstimatorError};
use crate::scenario::{DriftReport, ExperimentReport, ExtensionTrace, ScenarioConfig, ScenarioError};
use crate::types::{GroupName, MuscleGroup, MuscleId, SensorFrame};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("format error at row {row}: {message}")]
    Format { row: usize, message: String },
    #[error("log sample rate {log} Hz does not match estimator rate {config} Hz")]
    RateMismatch { log: f64, config: f64 },
    #[error("nothing to write: {0}")]
    Empty(&'static str),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io { path: path.display().to_string(), source }
}

fn read_text(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(io_err(path))
}

fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let mut f = fs::File::create(path).map_err(io_err(path))?;
    f.write_all(text.as_bytes()).map_err(io_err(path))
}

/// Parses a scenario document. Missing fields take their defaults; when only
/// one of `seeds` and `repeats` is given the other follows from it.
pub fn parse_scenario(text: &str) -> Result<ScenarioConfig, IoError> {
    let mut doc: Value = serde_json::from_str(text)
        .map_err(|e| IoError::Parse { line: e.line(), column: e.column(), message: e.to_string() })?;
    let obj = doc.as_object_mut().ok_or_else(|| IoError::Schema("top level must be an object".into()))?;
    match (obj.get("seeds").cloned(), obj.contains_key("repeats")) {
        (Some(Value::Array(seeds)), false) => {
            obj.insert("repeats".into(), Value::from(seeds.len()));
        }
        (None, true) => {
            if let Some(n) = obj.get("repeats").and_then(Value::as_u64) {
                obj.insert("seeds".into(), Value::from((1..=n).collect::<Vec<u64>>()));
            }
        }
        _ => {}
    }
    let cfg: ScenarioConfig = serde_json::from_value(doc).map_err(|e| IoError::Schema(e.to_string()))?;
    cfg.validate().map_err(|e| IoError::Schema(schema_message(e)))?;
    Ok(cfg)
}

fn schema_message(e: ScenarioError) -> String {
    match e {
        ScenarioError::BadConfig(s) => s,
        ScenarioError::Rig(crate::rig::RigError::Estimator(EstimatorError::BadConfig(s))) => format!("estimator: {s}"),
        other => other.to_string(),
    }
}

pub fn load_scenario(path: &Path) -> Result<ScenarioConfig, IoError> {
    parse_scenario(&read_text(path)?)
}

/// Metadata carried in the `#` lines of a sensor log.
#[derive(Debug, Clone, PartialEq)]
pub struct LogHeader {
    pub muscle_count: usize,
    /// Hz
    pub sample_rate: f64,
    pub groups: Vec<MuscleGroup>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensorLog {
    pub header: LogHeader,
    pub frames: Vec<SensorFrame>,
}

fn fixed6(out: &mut String, v: f64) {
    let v = if v == 0.0 { 0.0 } else { v };
    let _ = write!(out, "{v:.6}");
}

/// Renders a log. Values are written with six decimals, so frames already
/// quantized to 1e-6 read back bit for bit.
pub fn format_log(log: &SensorLog) -> Result<String, IoError> {
    if log.frames.is_empty() {
        return Err(IoError::Empty("sensor log has no frames"));
    }
    let m = log.header.muscle_count;
    let mut out = String::new();
    out.push_str("# vibroprobe sensor log\n");
    let _ = writeln!(out, "# muscles: {m}");
    let _ = writeln!(out, "# sample_rate: {}", log.header.sample_rate);
    for g in &log.header.groups {
        let ids: Vec<String> = g.members.iter().map(|id| id.0.to_string()).collect();
        let _ = writeln!(out, "# group {}: {}", g.name, ids.join(" "));
    }
    out.push_str("# units: t s, l_ref mm, l mm, f N\n");
    out.push('t');
    for prefix in ["l_ref", "l", "f"] {
        for i in 0..m {
            let _ = write!(out, ",{prefix}_{i}");
        }
    }
    out.push('\n');
    for (row, fr) in log.frames.iter().enumerate() {
        if fr.l_ref.len() != m || fr.l.len() != m || fr.f.len() != m {
            return Err(IoError::Format { row: row + 1, message: format!("frame does not have {m} muscles") });
        }
        fixed6(&mut out, fr.t);
        for v in fr.l_ref.iter().chain(&fr.l).chain(&fr.f) {
            out.push(',');
            fixed6(&mut out, *v);
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn write_log(path: &Path, log: &SensorLog) -> Result<(), IoError> {
    write_text(path, &format_log(log)?)
}

fn header_value<'a>(line: &'a str, key: &str) -> Option<&'a str> {
    line.strip_prefix('#')?.trim().strip_prefix(key)?.strip_prefix(':').map(str::trim)
}

pub fn parse_log(text: &str) -> Result<SensorLog, IoError> {
    let mut muscles = None;
    let mut rate = None;
    let mut groups = Vec::new();
    let mut body = String::new();
    for (i, line) in text.lines().enumerate() {
        if !line.starts_with('#') {
            body.push_str(line);
            body.push('\n');
            continue;
        }
        let bad = |m: &str| IoError::Format { row: i + 1, message: m.to_string() };
        if let Some(v) = header_value(line, "muscles") {
            muscles = Some(v.parse::<usize>().map_err(|_| bad("bad muscle count"))?);
        } else if let Some(v) = header_value(line, "sample_rate") {
            rate = Some(v.parse::<f64>().map_err(|_| bad("bad sample rate"))?);
        } else if let Some(rest) = line.strip_prefix('#').map(str::trim).and_then(|l| l.strip_prefix("group ")) {
            let (name, ids) = rest.split_once(':').ok_or_else(|| bad("bad group line"))?;
            let members = ids
                .split_whitespace()
                .map(|s| s.parse::<usize>().map(MuscleId))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| bad("bad group member"))?;
            groups.push(MuscleGroup::new(GroupName::parse(name.trim()), members));
        }
    }
    let m = muscles.ok_or(IoError::Format { row: 0, message: "missing '# muscles' header".into() })?;
    let sample_rate = rate.ok_or(IoError::Format { row: 0, message: "missing '# sample_rate' header".into() })?;
    let width = 1 + 3 * m;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(body.as_bytes());
    let head = reader.headers().map_err(|e| IoError::Format { row: 0, message: e.to_string() })?;
    if head.len() != width || head.get(0) != Some("t") {
        return Err(IoError::Format { row: 0, message: format!("header row must have {width} columns starting with t") });
    }
    let mut frames: Vec<SensorFrame> = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| IoError::Format { row, message: e.to_string() })?;
        if rec.len() != width {
            return Err(IoError::Format { row, message: format!("expected {width} columns, found {}", rec.len()) });
        }
        let vals = rec
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| IoError::Format { row, message: e.to_string() })?;
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(IoError::Format { row, message: "non-finite value".into() });
        }
        let t = vals[0];
        if let Some(prev) = frames.last() {
            if !(t > prev.t) {
                return Err(IoError::Format { row, message: format!("time {t} does not follow {}", prev.t) });
            }
        }
        frames.push(SensorFrame {
            t,
            l_ref: vals[1..1 + m].to_vec(),
            l: vals[1 + m..1 + 2 * m].to_vec(),
            f: vals[1 + 2 * m..].to_vec(),
        });
    }
    Ok(SensorLog { header: LogHeader { muscle_count: m, sample_rate, groups }, frames })
}

pub fn read_log(path: &Path) -> Result<SensorLog, IoError> {
    parse_log(&read_text(path)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Replay {
    pub timeline: Vec<ETimelineRow>,
    pub warnings: Vec<String>,
}

/// Runs the estimator over a recorded log.
pub fn replay_frames(log: &SensorLog, config: &EstimatorConfig) -> Result<Replay, IoError> {
    if log.header.sample_rate != config.sample_rate {
        return Err(IoError::RateMismatch { log: log.header.sample_rate, config: config.sample_rate });
    }
    let mut warnings = Vec::new();
    if log.frames.len() < config.window {
        warnings.push(format!(
            "log has {} frames, fewer than the {}-sample window; no estimate produced",
            log.frames.len(),
            config.window
        ));
    }
    let mut est = Estimator::new(config.clone())?;
    let mut timeline = Vec::new();
    for fr in &log.frames {
        if let Some(row) = est.push(fr)? {
            timeline.push(row);
        }
    }
    Ok(Replay { timeline, warnings })
}

pub fn replay_estimate(log_path: &Path, config: &EstimatorConfig) -> Result<Replay, IoError> {
    replay_frames(&read_log(log_path)?, config)
}

/// `t,e_raw,e` with shortest round-trip floats.
pub fn format_timeline(rows: &[ETimelineRow]) -> String {
    let mut out = String::from("t,e_raw,e\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{}", r.t, r.e_raw, r.e);
    }
    out
}

pub fn write_timeline(path: &Path, rows: &[ETimelineRow]) -> Result<(), IoError> {
    write_text(path, &format_timeline(rows))
}

pub fn parse_timeline(text: &str) -> Result<Vec<ETimelineRow>, IoError> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let head = reader.headers().map_err(|e| IoError::Format { row: 0, message: e.to_string() })?;
    if head.iter().collect::<Vec<_>>() != ["t", "e_raw", "e"] {
        return Err(IoError::Format { row: 0, message: "expected header t,e_raw,e".into() });
    }
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| IoError::Format { row, message: e.to_string() })?;
        let v = rec
            .iter()
            .map(|s| s.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| IoError::Format { row, message: e.to_string() })?;
        if v.len() != 3 {
            return Err(IoError::Format { row, message: "expected 3 columns".into() });
        }
        rows.push(ETimelineRow { t: v[0], e_raw: v[1], e: v[2] });
    }
    Ok(rows)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Per-label stop statistics: `label,stop,mean,std_dev` (empty deviation when
/// absent).
pub fn format_report_stats(reports: &[ExperimentReport]) -> String {
    let mut out = String::from("experiment,label,stop,mean,std_dev\n");
    for r in reports {
        for s in &r.stats {
            for (k, (m, sd)) in s.mean.iter().zip(&s.std_dev).enumerate() {
                let _ = writeln!(out, "{},{},{},{},{}", r.name, s.label, k + 1, m, opt(*sd));
            }
        }
    }
    out
}

/// Every run's stops: `experiment,label,seed,stop,t_start,t_end,e_ave`.
pub fn format_report_runs(reports: &[ExperimentReport]) -> String {
    let mut out = String::from("experiment,label,seed,stop,t_start,t_end,e_ave\n");
    for r in reports {
        for run in &r.runs {
            for (k, s) in run.stops.iter().enumerate() {
                let _ = writeln!(out, "{},{},{},{},{},{},{}", r.name, run.label, run.seed, k + 1, s.t_start, s.t_end, s.value);
            }
        }
    }
    out
}

pub fn format_report_metrics(reports: &[ExperimentReport]) -> String {
    let mut out = String::from("experiment,label,seed,metric,value\n");
    for r in reports {
        for m in &r.metrics {
            let _ = writeln!(out, "{},{},{},{},{}", r.name, m.label, m.seed, m.name, m.value);
        }
    }
    out
}

pub fn format_extension(traces: &[ExtensionTrace]) -> String {
    let mut out = String::from("seed,environment,e1,e2,s,verdict,chosen\n");
    for t in traces {
        for (i, a) in t.attempts.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{:?},{}",
                t.seed,
                a.environment,
                a.report.e1.value,
                a.report.e2.value,
                a.report.s,
                a.report.verdict,
                i == t.chosen
            );
        }
    }
    out
}

pub fn format_drift(report: &DriftReport) -> String {
    let mut out = String::from("seed,braced,final_drift_mm,rms_drift_mm,probe_s\n");
    for s in &report.samples {
        let _ = writeln!(out, "{},{},{},{},{}", s.seed, s.braced, s.final_drift, s.rms_drift, opt(s.probe.as_ref().map(|p| p.s)));
    }
    out
}

pub fn write_csv(path: &Path, text: &str) -> Result<(), IoError> {
    write_text(path, text)
}

/// One labelled line of a chart, optionally with symmetric error bars.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartSeries {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub errors: Option<Vec<f64>>,
}

pub fn timeline_series(rows: &[ETimelineRow]) -> ChartSeries {
    ChartSeries { label: "E".into(), points: rows.iter().map(|r| (r.t, r.e)).collect(), errors: None }
}

/// One series per label with the stop index on the x axis.
pub fn report_series(report: &ExperimentReport) -> Vec<ChartSeries> {
    report
        .stats
        .iter()
        .map(|s| ChartSeries {
            label: s.label.clone(),
            points: s.mean.iter().enumerate().map(|(k, m)| ((k + 1) as f64, *m)).collect(),
            errors: Some(s.std_dev.iter().map(|d| d.unwrap_or(0.0)).collect()),
        })
        .collect()
}

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

/// Standalone SVG line chart with axes and a legend.
pub fn render_chart(series: &[ChartSeries], title: &str) -> Result<String, IoError> {
    if series.is_empty() || series.iter().all(|s| s.points.is_empty()) {
        return Err(IoError::Empty("chart has no points"));
    }
    let (w, h, ml, mr, mt, mb) = (640.0, 400.0, 60.0, 140.0, 30.0, 40.0);
    let mut x0 = f64::INFINITY;
    let mut x1 = f64::NEG_INFINITY;
    let mut y0 = f64::INFINITY;
    let mut y1 = f64::NEG_INFINITY;
    for s in series {
        for (k, &(x, y)) in s.points.iter().enumerate() {
            let e = s.errors.as_ref().and_then(|e| e.get(k)).copied().unwrap_or(0.0);
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y - e);
            y1 = y1.max(y + e);
        }
    }
    y0 = y0.min(0.0);
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let px = |x: f64| ml + (x - x0) / (x1 - x0) * (w - ml - mr);
    let py = |y: f64| h - mb - (y - y0) / (y1 - y0) * (h - mt - mb);
    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{:.2}" y="20" font-size="14" text-anchor="middle">{}</text>"#, (w - mr + ml) / 2.0, escape(title));
    let (ax0, ax1, ay0, ay1) = (px(x0), px(x1), py(y0), py(y1));
    let _ = writeln!(out, r#"<line x1="{ax0:.2}" y1="{ay0:.2}" x2="{ax1:.2}" y2="{ay0:.2}" stroke="black"/>"#);
    let _ = writeln!(out, r#"<line x1="{ax0:.2}" y1="{ay0:.2}" x2="{ax0:.2}" y2="{ay1:.2}" stroke="black"/>"#);
    for k in 0..=4 {
        let fx = x0 + (x1 - x0) * k as f64 / 4.0;
        let fy = y0 + (y1 - y0) * k as f64 / 4.0;
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" font-size="10" text-anchor="middle">{}</text>"#, px(fx), ay0 + 14.0, tick(fx));
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" font-size="10" text-anchor="end">{}</text>"#, ax0 - 4.0, py(fy) + 3.0, tick(fy));
    }
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = s.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let _ = writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
        if let Some(errs) = &s.errors {
            for (&(x, y), e) in s.points.iter().zip(errs) {
                if *e > 0.0 {
                    let _ = writeln!(
                        out,
                        r#"<line x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}" stroke="{color}"/>"#,
                        px(x),
                        py(y - e),
                        py(y + e)
                    );
                }
            }
        }
        let ly = mt + 16.0 * i as f64 + 10.0;
        let lx = w - mr + 10.0;
        let _ = writeln!(out, r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#, lx + 20.0);
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" font-size="11">{}</text>"#, lx + 25.0, ly + 4.0, escape(&s.label));
    }
    out.push_str("</svg>\n");
    Ok(out)
}

fn tick(v: f64) -> String {
    let s = format!("{v:.2}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn emit_chart(series: &[ChartSeries], title: &str, path: &Path) -> Result<(), IoError> {
    write_text(path, &render_chart(series, title)?)
}

/// Chart for a CSV written by this module: a timeline gives one line, a
/// stats table one line per experiment and label.
pub fn chart_from_csv(text: &str) -> Result<Vec<ChartSeries>, IoError> {
    let first = text.lines().next().unwrap_or("");
    if first == "t,e_raw,e" {
        return Ok(vec![timeline_series(&parse_timeline(text)?)]);
    }
    if first != "experiment,label,stop,mean,std_dev" {
        return Err(IoError::Format { row: 0, message: "not a timeline or stats table".into() });
    }
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut out: Vec<ChartSeries> = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| IoError::Format { row, message: e.to_string() })?;
        let num = |k: usize| -> Result<f64, IoError> {
            rec.get(k).unwrap_or("").parse::<f64>().map_err(|e| IoError::Format { row, message: e.to_string() })
        };
        let label = format!("{} {}", &rec[0], &rec[1]);
        let (x, y) = (num(2)?, num(3)?);
        let e = if rec.get(4).unwrap_or("").is_empty() { 0.0 } else { num(4)? };
        match out.iter_mut().find(|s| s.label == label) {
            Some(s) => {
                s.points.push((x, y));
                s.errors.get_or_insert_with(Vec::new).push(e);
            }
            None => out.push(ChartSeries { label, points: vec![(x, y)], errors: Some(vec![e]) }),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(t: f64, m: usize) -> SensorFrame {
        SensorFrame { t, l_ref: vec![1.5; m], l: vec![-2.25; m], f: vec![0.000001; m] }
    }

    fn log(frames: Vec<SensorFrame>) -> SensorLog {
        let m = frames[0].muscle_count();
        SensorLog { header: LogHeader { muscle_count: m, sample_rate: 125.0, groups: vec![] }, frames }
    }

    #[test]
    fn empty_object_gives_defaults() {
        let cfg = parse_scenario("{}").unwrap();
        assert_eq!(cfg, ScenarioConfig::default());
        assert_eq!(cfg.excitation.freq, 12.5);
        assert_eq!(cfg.excitation.amplitude, 3.0);
        assert_eq!(cfg.estimator.window, 40);
        assert_eq!(cfg.probe.threshold, 0.6);
    }

    #[test]
    fn alpha_override_and_range() {
        let cfg = parse_scenario(r#"{"estimator": {"alpha": 0.5}}"#).unwrap();
        assert_eq!(cfg.estimator.alpha, 0.5);
        assert_eq!(cfg.estimator.window, 40);
        assert!(matches!(parse_scenario(r#"{"estimator": {"alpha": 1.5}}"#), Err(IoError::Schema(_))));
    }

    #[test]
    fn syntax_errors_carry_position() {
        match parse_scenario("{\n  \"seeds\": [1,\n}") {
            Err(IoError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_scenario(r#"{"repeats": "five"}"#), Err(IoError::Schema(_))));
    }

    #[test]
    fn seeds_and_repeats_follow_each_other() {
        assert_eq!(parse_scenario(r#"{"seeds": [4, 9]}"#).unwrap().repeats, 2);
        assert_eq!(parse_scenario(r#"{"repeats": 3}"#).unwrap().seeds, vec![1, 2, 3]);
        assert!(parse_scenario(r#"{"repeats": 3, "seeds": [1]}"#).is_err());
    }

    #[test]
    fn one_frame_round_trips() {
        let l = log(vec![frame(0.008, 3)]);
        assert_eq!(parse_log(&format_log(&l).unwrap()).unwrap(), l);
    }

    #[test]
    fn non_monotone_time_is_rejected() {
        let text = format_log(&log(vec![frame(0.016, 2), frame(0.008, 2)])).unwrap();
        match parse_log(&text) {
            Err(IoError::Format { row, .. }) => assert_eq!(row, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let mut text = format_log(&log(vec![frame(0.008, 2)])).unwrap();
        text.push_str("0.016,1\n");
        assert!(matches!(parse_log(&text), Err(IoError::Format { row: 2, .. })));
    }

    #[test]
    fn short_log_replays_to_nothing() {
        let l = log((1..=10).map(|k| frame(k as f64 * 0.008, 36)).collect());
        let r = replay_frames(&l, &EstimatorConfig::default()).unwrap();
        assert!(r.timeline.is_empty());
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn rate_mismatch() {
        let mut l = log(vec![frame(0.008, 36)]);
        l.header.sample_rate = 100.0;
        assert!(matches!(replay_frames(&l, &EstimatorConfig::default()), Err(IoError::RateMismatch { .. })));
    }

    #[test]
    fn timeline_round_trips() {
        let rows = vec![ETimelineRow { t: 0.352, e_raw: 0.1 + 0.2, e: 1.0 / 3.0 }];
        assert_eq!(parse_timeline(&format_timeline(&rows)).unwrap(), rows);
    }

    #[test]
    fn chart_is_deterministic() {
        let s = vec![ChartSeries { label: "a<b".into(), points: vec![(0.0, 1.0), (1.0, 2.0)], errors: None }];
        let a = render_chart(&s, "t").unwrap();
        assert_eq!(a, render_chart(&s, "t").unwrap());
        assert_eq!(a.matches("<polyline").count(), 1);
        assert!(a.contains("a&lt;b"));
        assert!(matches!(render_chart(&[], "t"), Err(IoError::Empty(_))));
    }
}
