use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};

use slicewatch::config::{Config, CONFIG_KEYS};
use slicewatch::error::Error;
use slicewatch::harness::{
    emit_bench, emit_results, evaluate_dataset, ingest_csv, run_bench, run_experiment, write_csv, write_schedule_csv,
    ColumnMapping, Dataset, ExperimentResult, Metrics, Mode, Variant,
};
use slicewatch::slicing_sim::{AnomalyTargets, Scenario};

const OUT_ENV: &str = "SLICEWATCH_OUT";

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG_PARSE: u8 = 3;
const EXIT_UNKNOWN_KEY: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "slicewatch", version, about = "Distributed anomaly detection for sliced networks")]
struct Cli {
    /// TOML config file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set ocsvm.eta=300` (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    /// Output directory [default: $SLICEWATCH_OUT or `out`]
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate one scenario and write trace.csv and anomalies.csv
    Simulate,
    /// Per-PN distributed OCSVM detection
    DetectPn(DetectArgs),
    /// Per-PL distributed CCA detection
    DetectPl(DetectArgs),
    /// Distributed detector against clean and ARTD-polluted baselines for both modes
    Bench,
    /// Validate a measurement CSV and print a stream summary
    Ingest {
        path: PathBuf,
        /// Label column holding 0/1 per row
        #[arg(long)]
        label: Option<String>,
    },
}

#[derive(Args, Debug)]
struct DetectArgs {
    #[arg(long, value_enum, default_value_t = VariantArg::Distributed)]
    variant: VariantArg,
    /// Measurement CSV to analyse instead of simulated runs
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Label column in the trace CSV
    #[arg(long)]
    label: Option<String>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum VariantArg {
    Distributed,
    Baseline,
}

fn keys_help() -> String {
    let width = CONFIG_KEYS.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut s = String::from("Config keys (file or --set):\n");
    for (k, d) in CONFIG_KEYS {
        s.push_str(&format!("  {k:width$}  {d}\n"));
    }
    s
}

fn out_dir(cli: &Cli) -> PathBuf {
    cli.out.clone().or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("out"))
}

fn mapping_for(path: &Path, label: Option<&String>) -> Result<ColumnMapping, Error> {
    let mut m = ColumnMapping::detect(path)?;
    if let Some(l) = label {
        m.label = Some(l.clone());
    }
    Ok(m)
}

fn fmt_metric(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".into(), |x| format!("{x:.4}"))
}

fn print_metrics(label: &str, m: &Metrics) {
    println!(
        "{label}: accuracy {} precision {} recall {} f1 {} fpr {}",
        fmt_metric(m.accuracy),
        fmt_metric(m.precision),
        fmt_metric(m.recall),
        fmt_metric(m.f1),
        fmt_metric(m.false_positive_rate)
    );
}

fn detect_cmd(cfg: &Config, out: &Path, mode: Mode, args: &DetectArgs) -> Result<(), Error> {
    let variant = match args.variant {
        VariantArg::Distributed => Variant::Distributed,
        VariantArg::Baseline => Variant::Baseline,
    };
    let res: ExperimentResult = match &args.trace {
        Some(path) => {
            let streams = ingest_csv(path, &mapping_for(path, args.label.as_ref())?)?;
            let ds = Dataset::from_streams(&streams)?;
            evaluate_dataset(&ds, cfg, mode, variant, &path.display().to_string())?
        }
        None => {
            let artd = if variant == Variant::Baseline { cfg.harness.artd } else { 0.0 };
            run_experiment(cfg, mode, variant, artd)?
        }
    };
    emit_results(&res.report, &res.series, out)?;
    match &res.report.mean_over_runs {
        Some(m) => print_metrics(&format!("{mode} {variant}"), m),
        None => {
            let alarms: u64 = res.report.runs.iter().flat_map(|r| &r.targets).map(|t| t.alarms).sum();
            println!("{mode} {variant}: {alarms} alarms (no labels)");
        }
    }
    println!("wrote {}", out.display());
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Error> {
    let cfg = Config::load(cli.config.as_deref(), &cli.overrides)?;
    let out = out_dir(cli);
    match &cli.command {
        Command::Simulate => {
            let targets = cfg.scenario.anomaly_targets.resolve(AnomalyTargets::Both);
            let sc = Scenario::build(&cfg.scenario, &cfg.seeds, targets)?;
            let ds = Dataset::from_trace(&sc.trace(), &sc.embeddings);
            std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
            write_csv(&ds, &out.join("trace.csv"))?;
            write_schedule_csv(&sc.schedule, &out.join("anomalies.csv"))?;
            println!(
                "{} PNs, {} VNs, {} steps, {} anomaly events; wrote {}",
                sc.network.num_pns(),
                ds.vns.len(),
                ds.num_steps(),
                sc.schedule.events.len(),
                out.display()
            );
        }
        Command::DetectPn(args) => detect_cmd(&cfg, &out, Mode::PnOcsvm, args)?,
        Command::DetectPl(args) => detect_cmd(&cfg, &out, Mode::PlCca, args)?,
        Command::Bench => {
            let entries = run_bench(&cfg)?;
            emit_bench(&entries, &out)?;
            for e in &entries {
                if let Some(m) = &e.result.report.mean_over_runs {
                    print_metrics(&format!("{} {}", e.mode, e.label), m);
                }
            }
            println!("wrote {}", out.display());
        }
        Command::Ingest { path, label } => {
            let streams = ingest_csv(path, &mapping_for(path, label.as_ref())?)?;
            let first = streams.streams.iter().filter_map(|s| s.times.first()).min();
            let last = streams.streams.iter().filter_map(|s| s.times.last()).max();
            let pns: std::collections::BTreeSet<_> = streams.streams.iter().map(|s| s.pn_id).collect();
            println!("file: {}", path.display());
            println!("streams: {}", streams.streams.len());
            println!("entries: {}", streams.total_entries());
            println!("pns: {}", pns.len());
            println!("features: {}", streams.feature_names.join(","));
            if let (Some(a), Some(b)) = (first, last) {
                println!("time: {a}..={b}");
            }
            println!("labels: {}", if streams.streams.iter().any(|s| s.labels.is_some()) { "yes" } else { "no" });
            match Dataset::from_streams(&streams) {
                Ok(ds) => println!("aligned: {} steps, {} virtual links", ds.num_steps(), ds.links.len()),
                Err(e) => println!("aligned: no ({e})"),
            }
        }
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::ConfigParse(_) | Error::InvalidConfig(_) => EXIT_CONFIG_PARSE,
        Error::UnknownKey(_) => EXIT_UNKNOWN_KEY,
        _ => EXIT_FAILURE,
    }
}

fn main() -> ExitCode {
    let matches = Cli::command().after_help(keys_help()).get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("slicewatch: {}", e.to_string().trim_end());
            ExitCode::from(exit_code(&e))
        }
    }
}
