//! Monte Carlo runs over simulated scenarios and the DO-versus-baseline bench.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use super::dataset::Dataset;
use super::detect::{detect, Detection, Mode, Variant};
use super::metrics::{compute_metrics, mean_metrics, ConfusionMatrix, Metrics};
use super::report::{emit_results, Report, RunReport, Series, Summary, TargetReport, REPORT_SCHEMA};
use crate::config::{Config, MetricMode, Seeds};
use crate::error::{Error, Result};
use crate::slicing_sim::{AnomalyTargets, Scenario};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub report: Report,
    pub series: Vec<Series>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub run: usize,
    pub seeds: Seeds,
    pub detection: Detection,
}

fn mode_targets(mode: Mode) -> AnomalyTargets {
    match mode {
        Mode::PnOcsvm => AnomalyTargets::Pn,
        Mode::PlCca => AnomalyTargets::Pl,
    }
}

/// Simulated dataset for run `run`; the baseline's training window is polluted at `artd`.
pub fn run_dataset(cfg: &Config, mode: Mode, variant: Variant, artd: f64, run: usize) -> Result<(Seeds, Dataset)> {
    let seeds = cfg.seeds.for_run(run);
    let kinds = cfg.scenario.anomaly_targets.resolve(mode_targets(mode));
    let mut sc = Scenario::build(&cfg.scenario, &seeds, kinds)?;
    if variant == Variant::Baseline && artd > 0.0 {
        let targets = Scenario::targets_of(&sc.network, mode_targets(mode));
        let s = &cfg.scenario;
        let polluted =
            sc.schedule.polluted(&targets, artd, cfg.harness.training_steps, s.loss_mean, s.loss_var, seeds.artd);
        sc = sc.with_schedule(polluted);
    }
    Ok((seeds, Dataset::from_trace(&sc.trace(), &sc.embeddings)))
}

pub fn run_once(cfg: &Config, mode: Mode, variant: Variant, artd: f64, run: usize) -> Result<RunOutcome> {
    let (seeds, ds) = run_dataset(cfg, mode, variant, artd, run)?;
    let run_cfg = Config { seeds, ..cfg.clone() };
    Ok(RunOutcome { run, seeds, detection: detect(&ds, &run_cfg, mode, variant)? })
}

fn validate_artd(artd: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&artd) {
        return Err(Error::InvalidConfig(format!("artd must lie in [0, 1], got {artd}")));
    }
    Ok(())
}

pub fn run_experiment(cfg: &Config, mode: Mode, variant: Variant, artd: f64) -> Result<ExperimentResult> {
    cfg.validate()?;
    validate_artd(artd)?;
    if cfg.harness.num_runs == 0 {
        return Err(Error::InvalidConfig("harness.num_runs must be at least 1".into()));
    }
    let outcomes = (0..cfg.harness.num_runs)
        .into_par_iter()
        .map(|r| run_once(cfg, mode, variant, artd, r))
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(cfg, mode, variant, artd, "simulated", &outcomes))
}

/// A single pass over an existing dataset, such as an ingested file.
pub fn evaluate_dataset(
    ds: &Dataset,
    cfg: &Config,
    mode: Mode,
    variant: Variant,
    source: &str,
) -> Result<ExperimentResult> {
    cfg.validate()?;
    let detection = detect(ds, cfg, mode, variant)?;
    let outcome = RunOutcome { run: 0, seeds: cfg.seeds, detection };
    Ok(summarize(cfg, mode, variant, 0.0, source, &[outcome]))
}

fn run_report(o: &RunOutcome) -> RunReport {
    let d = &o.detection;
    let to = d.num_steps();
    let targets: Vec<TargetReport> = d
        .targets
        .iter()
        .map(|t| {
            let confusion = t.confusion(d.scored_from, to);
            TargetReport {
                target: t.name.clone(),
                alarms: t.alarms[d.scored_from.min(to)..].iter().filter(|&&a| a).count() as u64,
                confusion,
                metrics: confusion.as_ref().map(compute_metrics),
            }
        })
        .collect();
    let confusion = targets.iter().map(|t| t.confusion).sum::<Option<ConfusionMatrix>>();
    RunReport { run: o.run, seeds: o.seeds, confusion, metrics: confusion.as_ref().map(compute_metrics), targets }
}

fn summarize(
    cfg: &Config,
    mode: Mode,
    variant: Variant,
    artd: f64,
    source: &str,
    outcomes: &[RunOutcome],
) -> ExperimentResult {
    let runs: Vec<RunReport> = outcomes.iter().map(run_report).collect();
    let pooled = runs.iter().map(|r| r.confusion).sum::<Option<ConfusionMatrix>>();
    let aggregate = pooled.map(|cm| Summary { confusion: cm, metrics: compute_metrics(&cm) });
    let run_metrics: Vec<Metrics> = runs.iter().filter_map(|r| r.metrics).collect();
    let mean_over_runs = (!run_metrics.is_empty()).then(|| mean_metrics(&run_metrics));
    let report = Report {
        schema: REPORT_SCHEMA.into(),
        mode,
        variant,
        artd,
        num_runs: outcomes.len(),
        training_steps: cfg.harness.training_steps,
        source: source.into(),
        config_hash: cfg.hash(),
        seeds: cfg.seeds,
        config: cfg.clone(),
        aggregate,
        mean_over_runs,
        runs,
    };
    let mut series = Vec::new();
    if let Some(c) = outcomes.first().and_then(|o| o.detection.convergence.as_ref()) {
        series.push(convergence_series(c));
    }
    if let Some(s) = metrics_series(cfg, outcomes) {
        series.push(s);
    }
    ExperimentResult { report, series }
}

fn convergence_series(c: &super::detect::ConvergenceTrace) -> Series {
    let k = c.w.first().map_or(0, |w| w.len());
    let mut columns = vec!["gap".to_string(), "rho".to_string()];
    columns.extend((0..k).map(|i| format!("w_{i}")));
    let values = (0..c.gap.len())
        .map(|t| {
            let mut row = vec![Some(c.gap[t]), Some(c.rho[t])];
            row.extend(c.w[t].iter().map(|&x| Some(x)));
            row
        })
        .collect();
    Series { name: format!("convergence_pn{}", c.pn), columns, steps: (0..c.gap.len()).collect(), values }
}

/// Metrics pooled over runs and targets at every `series_stride`-th scored step.
fn metrics_series(cfg: &Config, outcomes: &[RunOutcome]) -> Option<Series> {
    let first = outcomes.first()?;
    let from = first.detection.scored_from;
    let mut per_step: Vec<ConfusionMatrix> = Vec::new();
    for o in outcomes {
        let steps = o.detection.per_step_confusion()?;
        if per_step.is_empty() {
            per_step = steps;
        } else {
            for (acc, cm) in per_step.iter_mut().zip(steps) {
                *acc += cm;
            }
        }
    }
    if per_step.is_empty() {
        return None;
    }
    let mut prefix = vec![ConfusionMatrix::default()];
    for cm in &per_step {
        let mut next = *prefix.last().unwrap();
        next += *cm;
        prefix.push(next);
    }
    let diff = |a: &ConfusionMatrix, b: &ConfusionMatrix| ConfusionMatrix {
        tp: a.tp - b.tp,
        tn: a.tn - b.tn,
        fp: a.fp - b.fp,
        fn_: a.fn_ - b.fn_,
    };
    let stride = cfg.harness.series_stride.max(1);
    let n = per_step.len();
    let mut ends: Vec<usize> = (1..=n).filter(|k| k % stride == 0).collect();
    if ends.last() != Some(&n) {
        ends.push(n);
    }
    let values = ends
        .iter()
        .map(|&k| {
            let start = match cfg.harness.metric_mode {
                MetricMode::Cumulative => 0,
                MetricMode::Windowed => k.saturating_sub(cfg.harness.metric_window.max(1)),
            };
            let m = compute_metrics(&diff(&prefix[k], &prefix[start]));
            vec![m.accuracy, m.precision, m.recall, m.f1, m.false_positive_rate]
        })
        .collect();
    Some(Series {
        name: "metrics".into(),
        columns: ["accuracy", "precision", "recall", "f1", "false_positive_rate"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
        steps: ends.iter().map(|k| from + k - 1).collect(),
        values,
    })
}

/// Bench entry: DO, clean baseline and ARTD-polluted baseline for one mode.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchEntry {
    pub mode: Mode,
    /// `distributed`, `baseline` or `baseline-artd`.
    pub label: String,
    pub result: ExperimentResult,
}

pub fn bench_plan(cfg: &Config) -> Vec<(Mode, &'static str, Variant, f64)> {
    let mut plan = Vec::new();
    for mode in [Mode::PnOcsvm, Mode::PlCca] {
        plan.push((mode, "distributed", Variant::Distributed, 0.0));
        plan.push((mode, "baseline", Variant::Baseline, 0.0));
        plan.push((mode, "baseline-artd", Variant::Baseline, cfg.harness.artd));
    }
    plan
}

pub fn run_bench(cfg: &Config) -> Result<Vec<BenchEntry>> {
    bench_plan(cfg)
        .into_iter()
        .map(|(mode, label, variant, artd)| {
            Ok(BenchEntry { mode, label: label.into(), result: run_experiment(cfg, mode, variant, artd)? })
        })
        .collect()
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "null".into(), |x| x.to_string())
}

/// `summary.csv` with one row per bench entry (run-averaged metrics), then
/// `<mode>/<label>/` holding each report and its series.
pub fn emit_bench(entries: &[BenchEntry], dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut summary = String::from("mode,variant,artd,accuracy,precision,recall,f1,false_positive_rate\n");
    for e in entries {
        emit_results(&e.result.report, &e.result.series, &dir.join(e.mode.to_string()).join(&e.label))?;
        let m = e.result.report.mean_over_runs.unwrap_or_default();
        let _ = writeln!(
            summary,
            "{},{},{},{},{},{},{},{}",
            e.mode,
            e.label,
            e.result.report.artd,
            fmt_opt(m.accuracy),
            fmt_opt(m.precision),
            fmt_opt(m.recall),
            fmt_opt(m.f1),
            fmt_opt(m.false_positive_rate)
        );
    }
    let path = dir.join("summary.csv");
    fs::write(&path, summary).map_err(|e| Error::io(&path, e))
}
