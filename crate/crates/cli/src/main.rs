use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use sflow_core::cost::{
    baseline_cost, estimate_baseline_cost, estimate_fixed_cost, estimate_variable_cost,
    CostLedger, CostScenario, CostSummary, Footprint, PricingTable, Usage,
};
use sflow_core::metrics::{compute_metrics, summarize, RunMetrics, SummaryRow};
use sflow_core::model::DagDefinition;
use sflow_core::platform::{simulate, System, TraceLog};
use sflow_core::stats::median;
use sflow_core::workloads::{analyze, parse_trace_dag, suggested_period};

mod config;

use config::{seeds_from_env, ExperimentConfig};

#[derive(Parser)]
#[command(name = "sflow", version, about = "Simulate event-driven and polling workflow orchestration")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write traces, metrics and a summary.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seeds to run; override the config and SFLOW_SEED.
        #[arg(long)]
        seed: Vec<u64>,
        /// Systems to run; override the config.
        #[arg(long)]
        system: Vec<System>,
    },
    /// Price a named scenario or a recorded trace for one day.
    Cost {
        #[arg(long, conflicts_with = "trace", required_unless_present = "trace")]
        scenario: Option<CostScenario>,
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Price the fixed components without redundancy.
        #[arg(long)]
        no_ha: bool,
        /// JSON price table replacing the defaults.
        #[arg(long)]
        pricing: Option<PathBuf>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Print shape statistics of a DAG file (.json definition or trace .csv).
    Analyze { dag: PathBuf },
    /// Join two summary files by metric and print ratios (b / a).
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        a_system: Option<String>,
        #[arg(long)]
        b_system: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            out,
            seed,
            system,
        } => cmd_run(&config, out, seed, system),
        Command::Cost {
            scenario,
            trace,
            no_ha,
            pricing,
            out,
        } => cmd_cost(scenario, trace.as_deref(), !no_ha, pricing.as_deref(), &out),
        Command::Analyze { dag } => cmd_analyze(&dag),
        Command::Compare {
            a,
            b,
            a_system,
            b_system,
            out,
        } => cmd_compare(&a, &b, a_system.as_deref(), b_system.as_deref(), out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?;
    w.write_record(["system", "metric", "count", "min", "p25", "median", "p75", "max", "mean"])?;
    for r in rows {
        let f = |x: f64| format!("{x:.3}");
        w.write_record([
            r.system.clone(),
            r.metric.clone(),
            r.count.to_string(),
            f(r.min),
            f(r.p25),
            f(r.median),
            f(r.p75),
            f(r.max),
            f(r.mean),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_run(
    config_path: &Path,
    out: Option<PathBuf>,
    seeds: Vec<u64>,
    systems: Vec<System>,
) -> Result<()> {
    let mut config = ExperimentConfig::load(config_path)?;
    if !seeds.is_empty() {
        config.seeds = seeds;
    } else if let Ok(v) = std::env::var("SFLOW_SEED") {
        config.seeds = seeds_from_env(&v)?;
    }
    if !systems.is_empty() {
        config.systems = systems;
    }
    if let Some(out) = out {
        config.output_dir = out;
    }
    config.validate()?;
    let base_dir = config_path.parent().unwrap_or(Path::new("."));
    let scenario = config.scenario(base_dir)?;

    // Simulate everything before writing anything.
    let mut results: Vec<(System, u64, TraceLog, Vec<RunMetrics>)> = Vec::new();
    for &system in &config.systems {
        for &seed in &config.seeds {
            log::info!("running {system} seed {seed}");
            let trace = simulate(system, &scenario, &config.platform, &config.baseline, seed)
                .with_context(|| format!("{system} seed {seed}"))?;
            let mut metrics = compute_metrics(&trace)?;
            if config.exclude_first_run {
                metrics.retain(|m| m.run_index != Some(0));
            }
            results.push((system, seed, trace, metrics));
        }
    }

    let out = &config.output_dir;
    let mut per_system: BTreeMap<System, Vec<RunMetrics>> = BTreeMap::new();
    for (system, seed, trace, metrics) in results {
        let dir = out.join(system.as_str()).join(format!("seed-{seed}"));
        trace.write_artifacts(&dir)?;
        fs::write(dir.join("metrics.json"), serde_json::to_string_pretty(&metrics)?)?;
        per_system.entry(system).or_default().extend(metrics);
    }
    let mut rows = Vec::new();
    for (system, metrics) in &per_system {
        rows.extend(summarize(system.as_str(), metrics));
    }
    write_summary(&out.join("summary.csv"), &rows)?;

    let makespan = |s: System| -> Option<f64> {
        let m: Vec<f64> = per_system.get(&s)?.iter().map(|r| r.c_max).collect();
        median(&m)
    };
    for row in rows.iter().filter(|r| r.metric != "normalized_overhead") {
        println!(
            "{:<14} {:<10} n={:<5} median={:.3} mean={:.3}",
            row.system, row.metric, row.count, row.median, row.mean
        );
    }
    if let Some(base) = makespan(System::Baseline) {
        for s in [System::SairflowFaas, System::SairflowCaas] {
            if let Some(m) = makespan(s) {
                println!("makespan ratio baseline/{s}: {:.2}", base / m);
            }
        }
    }
    println!("wrote {}", out.display());
    Ok(())
}

fn print_ledger(title: &str, ledger: &CostLedger) {
    println!("{title}");
    for i in &ledger.items {
        println!("  {:<20} {:>10.4}  {}", i.component, i.subtotal, i.notes);
    }
    println!("  {:<20} {:>10.4}", "Total", ledger.total());
}

fn cmd_cost(
    scenario: Option<CostScenario>,
    trace: Option<&Path>,
    ha: bool,
    pricing: Option<&Path>,
    out: &Path,
) -> Result<()> {
    let pricing = match pricing {
        Some(p) => PricingTable::from_json(&fs::read_to_string(p)?)?,
        None => PricingTable::default(),
    };
    let mut summaries = Vec::new();
    let ledger = match (scenario, trace) {
        (Some(s), None) => {
            let mut ledger = estimate_fixed_cost(ha, &pricing);
            ledger.extend(estimate_variable_cost(&s.usage(), &pricing, &Footprint::default())?);
            summaries.push(CostSummary::of(s.as_str(), s.executor().as_str(), &ledger));
            let base = baseline_cost(1.0, s.baseline_worker_hours(5, 1), &pricing);
            summaries.push(CostSummary::of(&format!("{s} baseline"), "workers", &base));
            print_ledger(&format!("{s} ({})", s.executor()), &ledger);
            ledger
        }
        (None, Some(path)) => {
            let trace = TraceLog::load(path)
                .with_context(|| format!("cannot load trace {}", path.display()))?;
            let ledger = if trace.system == System::Baseline {
                estimate_baseline_cost(&trace, &pricing)?
            } else {
                let mut l = estimate_fixed_cost(ha, &pricing);
                l.extend(estimate_variable_cost(
                    &Usage::from_trace(&trace)?,
                    &pricing,
                    &Footprint::default(),
                )?);
                l
            };
            summaries.push(CostSummary::of(trace.system.as_str(), "trace", &ledger));
            print_ledger(&format!("{} trace", trace.system), &ledger);
            ledger
        }
        _ => bail!("pass exactly one of --scenario or --trace"),
    };

    fs::create_dir_all(out)?;
    ledger.write_csv(fs::File::create(out.join("ledger.csv"))?)?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(out.join("cost_summary.csv"))?;
    w.write_record(["name", "executor", "fixed", "variable", "total"])?;
    for s in &summaries {
        println!(
            "{}: fixed {:.2} + variable {:.2} = {:.2}",
            s.name, s.fixed, s.variable, s.total
        );
        w.write_record([
            s.name.clone(),
            s.executor.clone(),
            format!("{:.2}", s.fixed),
            format!("{:.2}", s.variable),
            format!("{:.2}", s.total),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_analyze(path: &Path) -> Result<()> {
    let dag = match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => parse_trace_dag(path)?,
        _ => DagDefinition::load(path)?,
    };
    dag.validate()?;
    let s = analyze(&dag)?;
    println!("dag: {}", dag.dag_id);
    println!("n: {}", s.n);
    println!("p_d: {}", s.p_d);
    println!("n_L: {}", s.n_l);
    println!("n_W: {}", s.n_w);
    println!("suggested T: {}", suggested_period(s.p_d));
    Ok(())
}

fn read_summary(path: &Path) -> Result<Vec<SummaryRow>> {
    let mut r = csv::Reader::from_path(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

fn cmd_compare(
    a: &Path,
    b: &Path,
    a_system: Option<&str>,
    b_system: Option<&str>,
    out: Option<&Path>,
) -> Result<()> {
    let filter = |rows: Vec<SummaryRow>, system: Option<&str>| -> Vec<SummaryRow> {
        rows.into_iter()
            .filter(|r| system.is_none_or(|s| r.system == s))
            .collect()
    };
    let rows_a = filter(read_summary(a)?, a_system);
    let rows_b = filter(read_summary(b)?, b_system);
    let mut lines = Vec::new();
    for ra in &rows_a {
        for rb in rows_b.iter().filter(|rb| rb.metric == ra.metric) {
            let ratio = |x: f64, y: f64| if x != 0.0 { format!("{:.3}", y / x) } else { String::new() };
            lines.push([
                ra.metric.clone(),
                ra.system.clone(),
                rb.system.clone(),
                format!("{:.3}", ra.median),
                format!("{:.3}", rb.median),
                ratio(ra.median, rb.median),
                format!("{:.3}", ra.mean),
                format!("{:.3}", rb.mean),
                ratio(ra.mean, rb.mean),
            ]);
        }
    }
    if lines.is_empty() {
        bail!("no metric appears in both summaries");
    }
    let header = [
        "metric", "a_system", "b_system", "a_median", "b_median", "median_ratio", "a_mean",
        "b_mean", "mean_ratio",
    ];
    let sink: Box<dyn std::io::Write> = match out {
        Some(p) => Box::new(fs::File::create(p)?),
        None => Box::new(std::io::stdout()),
    };
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(sink);
    w.write_record(header)?;
    for l in lines {
        w.write_record(l)?;
    }
    w.flush()?;
    Ok(())
}
