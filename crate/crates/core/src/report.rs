//! End-to-end pipeline and report rendering.

use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dual::{chp_price_set, uplifts, GeneratorUplift, PriceSet, Representative};
use crate::error::{PricingError, Result};
use crate::market::{validate_instance_with_tol, MarketInstance, API_TOL};
use crate::mchp::{diagnostics, mchp_price_set_limit_with, mchp_uplifts, CaseTag, Diagnostics, MchpResult};
use crate::primal::{solve_primal, ScheduleEntry};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineOptions {
    pub epsilon_override: Option<f64>,
    pub rep: Representative,
    /// Comparison tolerance for feasibility and LNMGU classification.
    pub tol: f64,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            epsilon_override: None,
            rep: Representative::Lo,
            tol: API_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSummary {
    pub demand: f64,
    pub generators: Vec<String>,
    pub total_capacity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispatchSummary {
    pub total_cost: f64,
    pub committed: Vec<String>,
    pub schedule: Vec<ScheduleEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChpSummary {
    pub price_set: PriceSet,
    pub price_used: f64,
    pub uplifts: Vec<GeneratorUplift>,
    pub total_uplift: f64,
    pub dual_value: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub demand: f64,
    pub chp: Option<PriceSet>,
    pub mchp: Option<PriceSet>,
    pub error: Option<String>,
}

/// Wall-clock milliseconds per stage. Never serialized and ignored by
/// equality so reports compare by content.
#[derive(Debug, Clone, Default)]
pub struct Timings {
    pub stages: Vec<(&'static str, f64)>,
}

impl PartialEq for Timings {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PricingReport {
    pub instance: InstanceSummary,
    pub dispatch: DispatchSummary,
    pub chp: ChpSummary,
    pub mchp: MchpResult,
    pub diagnostics: Diagnostics,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Vec<SweepPoint>>,
    #[serde(skip)]
    pub timings: Timings,
}

struct Stopwatch {
    last: Instant,
    timings: Timings,
}

impl Stopwatch {
    fn new() -> Self {
        Stopwatch {
            last: Instant::now(),
            timings: Timings::default(),
        }
    }

    fn lap(&mut self, stage: &'static str) {
        let now = Instant::now();
        let ms = (now - self.last).as_secs_f64() * 1e3;
        self.timings.stages.push((stage, ms));
        self.last = now;
    }
}

/// Demand that validated within tolerance of total capacity but exceeds it
/// is cleared at full capacity.
fn snap_demand(instance: &MarketInstance) -> MarketInstance {
    let capacity = instance.total_capacity();
    if instance.demand > capacity {
        instance.with_demand(capacity)
    } else {
        instance.clone()
    }
}

/// Validates, solves the dispatch, prices it both ways and runs the
/// diagnostics. Errors carry the label of the stage that raised them.
pub fn run_pipeline(instance: &MarketInstance, options: &PipelineOptions) -> Result<PricingReport> {
    let mut clock = Stopwatch::new();

    let violations = validate_instance_with_tol(instance, options.tol);
    if !violations.is_empty() {
        return Err(PricingError::at("validate")(PricingError::Validation(violations)));
    }
    let snapped = snap_demand(instance);
    let instance = &snapped;
    clock.lap("validate");

    let dispatch = solve_primal(instance).map_err(PricingError::at("primal"))?;
    clock.lap("primal");

    let chp_set = chp_price_set(instance).map_err(PricingError::at("chp"))?;
    let chp = uplifts(instance, &dispatch, &chp_set, chp_set.representative(options.rep))
        .map_err(PricingError::at("chp"))?;
    clock.lap("chp");

    let limit = mchp_price_set_limit_with(instance, options.epsilon_override, options.tol)
        .map_err(PricingError::at("mchp"))?;
    let mchp = mchp_uplifts(instance, &dispatch, &limit, limit.price_set.representative(options.rep))
        .map_err(PricingError::at("mchp"))?;
    clock.lap("mchp");

    let diagnostics = diagnostics(instance, &dispatch, &chp_set, &chp, &mchp);
    clock.lap("diagnostics");

    Ok(PricingReport {
        instance: InstanceSummary {
            demand: instance.demand,
            generators: instance.generators.iter().map(|g| g.id.clone()).collect(),
            total_capacity: instance.total_capacity(),
        },
        dispatch: DispatchSummary {
            total_cost: dispatch.total_cost,
            committed: dispatch.committed,
            schedule: dispatch.schedule,
        },
        chp: ChpSummary {
            price_set: chp_set,
            price_used: chp.price_used,
            uplifts: chp.uplifts,
            total_uplift: chp.total_uplift,
            dual_value: chp.dual_value,
            gap: chp.gap,
        },
        mchp,
        diagnostics,
        sweep: None,
        timings: clock.timings,
    })
}

/// CHP and MCHP price sets for the same generators at each demand level.
/// Infeasible or invalid points are reported inline.
pub fn load_sweep(instance: &MarketInstance, grid: &[f64], options: &PipelineOptions) -> Vec<SweepPoint> {
    grid.iter()
        .map(|&d| {
            let inst = instance.with_demand(d);
            let priced = (|| {
                let violations = validate_instance_with_tol(&inst, options.tol);
                if !violations.is_empty() {
                    return Err(PricingError::Validation(violations));
                }
                let inst = snap_demand(&inst);
                let chp = chp_price_set(&inst)?;
                let mchp = mchp_price_set_limit_with(&inst, options.epsilon_override, options.tol)?;
                Ok((chp, mchp.price_set))
            })();
            match priced {
                Ok((chp, mchp)) => SweepPoint {
                    demand: d,
                    chp: Some(chp),
                    mchp: Some(mchp),
                    error: None,
                },
                Err(e) => SweepPoint {
                    demand: d,
                    chp: None,
                    mchp: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
    Markdown,
}

impl FromStr for ReportFormat {
    type Err = PricingError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(PricingError::UnknownFormat(other.to_owned())),
        }
    }
}

pub fn render_report(report: &PricingReport, format: &str) -> Result<String> {
    Ok(match format.parse()? {
        ReportFormat::Json => canonical_json(report),
        ReportFormat::Csv => render_csv(report),
        ReportFormat::Markdown => render_markdown(report),
    })
}

/// Rounds to 12 significant digits; magnitudes below 1e-12 become zero.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x.abs() < 1e-12 {
        return if x.is_finite() { 0.0 } else { x };
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn canonicalize(v: Value) -> Value {
    match v {
        Value::Number(n) if !(n.is_i64() || n.is_u64()) => n
            .as_f64()
            .and_then(|x| serde_json::Number::from_f64(round_sig(x)))
            .map_or(Value::Null, Value::Number),
        Value::Array(a) => Value::Array(a.into_iter().map(canonicalize).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, canonicalize(v))).collect()),
        other => other,
    }
}

/// Pretty JSON with sorted keys and numbers at 12 significant digits.
pub fn canonical_json(report: &PricingReport) -> String {
    let value = serde_json::to_value(report).expect("report serializes");
    let mut out = serde_json::to_string_pretty(&canonicalize(value)).expect("value serializes");
    out.push('\n');
    out
}

pub fn parse_report(text: &str) -> Result<PricingReport> {
    serde_json::from_str(text).map_err(|e| PricingError::Schema(e.to_string()))
}

fn num(x: f64) -> String {
    if x.is_finite() {
        round_sig(x).to_string()
    } else {
        "inf".to_owned()
    }
}

fn uplift_of(list: &[GeneratorUplift], id: &str) -> f64 {
    list.iter().find(|u| u.id == id).map_or(0.0, |u| u.uplift)
}

fn render_csv(report: &PricingReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["id", "x", "u", "chp_uplift", "mchp_uplift"])
        .expect("in-memory write");
    for e in &report.dispatch.schedule {
        w.write_record([
            e.id.clone(),
            num(e.output),
            u8::from(e.on).to_string(),
            num(uplift_of(&report.chp.uplifts, &e.id)),
            num(uplift_of(&report.mchp.uplifts, &e.id)),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

fn fmt_set(s: &PriceSet) -> String {
    if s.unbounded_above {
        format!("[{}, +inf)", num(s.lo))
    } else if round_sig(s.lo) == round_sig(s.hi) {
        format!("{{{}}}", num(s.lo))
    } else {
        format!("[{}, {}]", num(s.lo), num(s.hi))
    }
}

fn case_name(tag: CaseTag) -> &'static str {
    match tag {
        CaseTag::LnmguMarginal => "LNMGU sets the price",
        CaseTag::IntervalUpperCapped => "capped by cheapest LNMGU",
        CaseTag::LnmguIrrelevant => "regular units clear demand",
        CaseTag::NoLnmgu => "no LNMGU",
    }
}

fn render_markdown(r: &PricingReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "# Pricing report\n\nDemand {} MW, dispatch cost {}, committed: {}.\n",
        num(r.instance.demand),
        num(r.dispatch.total_cost),
        if r.dispatch.committed.is_empty() { "none".to_owned() } else { r.dispatch.committed.join(", ") },
    );

    let _ = writeln!(s, "| | convex hull | modified |\n|---|---|---|");
    let _ = writeln!(s, "| price set | {} | {} |", fmt_set(&r.chp.price_set), fmt_set(&r.mchp.price_set_limit));
    let _ = writeln!(s, "| price used | {} | {} |", num(r.chp.price_used), num(r.mchp.price_used));
    let _ = writeln!(s, "| total uplift | {} | {} |", num(r.chp.total_uplift), num(r.mchp.total_uplift));
    let _ = writeln!(s, "| duality gap | {} | |", num(r.chp.gap));
    let _ = writeln!(s, "| case | | {} |", case_name(r.mchp.case_tag));
    let lnmgu = if r.mchp.lnmgu.is_empty() { "none".to_owned() } else { r.mchp.lnmgu.join(", ") };
    let _ = writeln!(s, "| LNMGUs | | {lnmgu} |\n");

    let _ = writeln!(s, "| generator | u | x | convex hull uplift | modified uplift |\n|---|---|---|---|---|");
    for e in &r.dispatch.schedule {
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} | {} |",
            e.id,
            u8::from(e.on),
            num(e.output),
            num(uplift_of(&r.chp.uplifts, &e.id)),
            num(uplift_of(&r.mchp.uplifts, &e.id)),
        );
    }

    if !r.diagnostics.checks.is_empty() {
        let _ = writeln!(s, "\n| check | result |\n|---|---|");
        for c in &r.diagnostics.checks {
            let _ = writeln!(s, "| {} | {} |", c.name, if c.passed { "pass" } else { "FAIL" });
        }
    }

    if let Some(sweep) = &r.sweep {
        let _ = writeln!(s, "\n| demand | convex hull | modified |\n|---|---|---|");
        for p in sweep {
            match (&p.chp, &p.mchp, &p.error) {
                (Some(c), Some(m), _) => {
                    let _ = writeln!(s, "| {} | {} | {} |", num(p.demand), fmt_set(c), fmt_set(m));
                }
                (_, _, e) => {
                    let _ = writeln!(s, "| {} | {} | |", num(p.demand), e.as_deref().unwrap_or("error"));
                }
            }
        }
    }
    s
}
