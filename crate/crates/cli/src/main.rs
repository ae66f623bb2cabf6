use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use hullprice::{
    load_sweep, parse_instance_with_tol, render_report, run_pipeline, PipelineOptions, PricingError, PricingReport,
    ReportFormat, Representative,
};

/// Price a fixed-load market instance with convex hull pricing and its
/// contract-restricted variant.
#[derive(Parser, Debug)]
#[command(name = "price", version)]
struct Args {
    /// Instance file (JSON)
    instance: PathBuf,

    /// Output format: json, csv or markdown
    #[arg(long, default_value = "json", value_parser = parse_format)]
    format: ReportFormat,

    /// Capping margin for the numeric cross-check, in MW (default 1e-6·d)
    #[arg(long)]
    epsilon: Option<f64>,

    /// Demand levels for a load sweep, comma separated
    #[arg(long, value_delimiter = ',')]
    sweep: Option<Vec<f64>>,

    /// Member of each price set used for uplifts: lo, mid or hi
    #[arg(long, default_value = "lo")]
    rep: Representative,

    /// Comparison tolerance for feasibility and LNMGU classification
    #[arg(long, env = "PRICER_TOL", default_value_t = hullprice::API_TOL, hide = true)]
    tol: f64,
}

fn parse_format(s: &str) -> Result<ReportFormat, String> {
    s.parse().map_err(|e: PricingError| e.to_string())
}

const EXIT_DIAGNOSTICS: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<PricingError>() {
        Some(e) if e.is_infeasible() => EXIT_INFEASIBLE,
        Some(e) => match e.root() {
            PricingError::Schema(_) | PricingError::Validation(_) | PricingError::Domain { .. } => EXIT_INVALID,
            _ => EXIT_DIAGNOSTICS,
        },
        None => EXIT_DIAGNOSTICS,
    }
}

fn format_name(format: ReportFormat) -> &'static str {
    match format {
        ReportFormat::Json => "json",
        ReportFormat::Csv => "csv",
        ReportFormat::Markdown => "markdown",
    }
}

fn price(args: &Args) -> anyhow::Result<PricingReport> {
    let text = fs::read_to_string(&args.instance).with_context(|| format!("reading {}", args.instance.display()))?;
    let instance = parse_instance_with_tol(&text, args.tol)?;
    let options = PipelineOptions {
        epsilon_override: args.epsilon,
        rep: args.rep,
        tol: args.tol,
    };
    let mut report = run_pipeline(&instance, &options)?;
    if let Some(grid) = &args.sweep {
        report.sweep = Some(load_sweep(&instance, grid, &options));
    }
    Ok(report)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let report = match price(&args) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(exit_code(&e));
        }
    };

    match render_report(&report, format_name(args.format)) {
        Ok(text) => print!("{text}"),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_DIAGNOSTICS);
        }
    }

    for check in &report.diagnostics.checks {
        let verdict = if check.passed { "ok" } else { "FAIL" };
        eprintln!("{verdict:>4} {}: {}", check.name, check.detail);
    }
    let timings: Vec<String> = report
        .timings
        .stages
        .iter()
        .map(|(stage, ms)| format!("{stage} {ms:.3}ms"))
        .collect();
    eprintln!("timings: {}", timings.join(", "));

    if report.diagnostics.all_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_DIAGNOSTICS)
    }
}
