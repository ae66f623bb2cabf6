//! Market instances: generators with start-up costs and convex variable costs
//! serving a fixed demand, plus the JSON interchange format.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{PricingError, Result};

/// Default absolute tolerance for comparisons at API boundaries.
pub const API_TOL: f64 = 1e-7;

/// Convex, nondecreasing variable cost `c(x)` with `c(0) = 0`.
///
/// The quadratic form is `c(x) = a·x + q·x²/2`. Piecewise-linear pairs are
/// `(segment right endpoint, segment slope)` with segments contiguous from 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum CostCurve {
    Linear(f64),
    Quadratic { a: f64, q: f64 },
    Pwl(Vec<(f64, f64)>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub id: String,
    #[serde(rename = "w")]
    pub startup_cost: f64,
    pub curve: CostCurve,
    pub x_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketInstance {
    pub demand: f64,
    pub generators: Vec<GeneratorSpec>,
}

impl GeneratorSpec {
    pub fn new(id: impl Into<String>, startup_cost: f64, curve: CostCurve, x_max: f64) -> Self {
        GeneratorSpec {
            id: id.into(),
            startup_cost,
            curve,
            x_max,
        }
    }
}

impl MarketInstance {
    pub fn new(demand: f64, generators: Vec<GeneratorSpec>) -> Self {
        MarketInstance { demand, generators }
    }

    pub fn total_capacity(&self) -> f64 {
        self.generators.iter().map(|g| g.x_max).sum()
    }

    pub fn generator(&self, id: &str) -> Option<&GeneratorSpec> {
        self.generators.iter().find(|g| g.id == id)
    }

    /// Same generators, different demand.
    pub fn with_demand(&self, demand: f64) -> MarketInstance {
        MarketInstance {
            demand,
            generators: self.generators.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instance serialization is infallible")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Rule {
    DemandNotPositive,
    NoGenerators,
    Infeasible,
    DuplicateId,
    StartupNegative,
    CapacityNotPositive,
    NonFinite,
    Decreasing,
    NonConvex,
    PwlEmpty,
    PwlNotAscending,
    PwlShort,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::DemandNotPositive => "demand not positive",
            Rule::NoGenerators => "no generators",
            Rule::Infeasible => "infeasible",
            Rule::DuplicateId => "duplicate id",
            Rule::StartupNegative => "startup_cost negative",
            Rule::CapacityNotPositive => "capacity not positive",
            Rule::NonFinite => "non-finite coefficient",
            Rule::Decreasing => "decreasing curve",
            Rule::NonConvex => "non-convex curve",
            Rule::PwlEmpty => "empty pwl",
            Rule::PwlNotAscending => "pwl breakpoints not ascending",
            Rule::PwlShort => "pwl does not cover capacity",
        }
    }
}

/// A violated invariant, optionally attributed to a generator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub generator: Option<String>,
    pub rule: Rule,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.generator, self.rule) {
            (Some(id), Rule::DuplicateId) => write!(f, "duplicate id {id}"),
            (Some(id), rule) => write!(f, "{id}: {}", rule.name()),
            (None, rule) => f.write_str(rule.name()),
        }
    }
}

/// Parses and validates an instance from JSON text.
pub fn parse_instance(text: &str) -> Result<MarketInstance> {
    parse_instance_with_tol(text, API_TOL)
}

pub fn parse_instance_with_tol(text: &str, tol: f64) -> Result<MarketInstance> {
    let instance: MarketInstance =
        serde_json::from_str(text).map_err(|e| PricingError::Schema(e.to_string()))?;
    let violations = validate_instance_with_tol(&instance, tol);
    if violations.is_empty() {
        Ok(instance)
    } else {
        Err(PricingError::Validation(violations))
    }
}

/// Every violated invariant, ordered by generator id then rule name.
/// Instance-level violations come first.
pub fn validate_instance(instance: &MarketInstance) -> Vec<Violation> {
    validate_instance_with_tol(instance, API_TOL)
}

pub fn validate_instance_with_tol(instance: &MarketInstance, tol: f64) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |generator: Option<&str>, rule: Rule| {
        out.push(Violation {
            generator: generator.map(str::to_owned),
            rule,
        })
    };

    if !(instance.demand.is_finite() && instance.demand > 0.0) {
        push(None, Rule::DemandNotPositive);
    }
    if instance.generators.is_empty() {
        push(None, Rule::NoGenerators);
    }

    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    for g in &instance.generators {
        *seen.entry(g.id.as_str()).or_default() += 1;
    }
    for (id, count) in &seen {
        if *count > 1 {
            push(Some(id), Rule::DuplicateId);
        }
    }

    let mut capacity_ok = true;
    for g in &instance.generators {
        let id = Some(g.id.as_str());
        if !g.startup_cost.is_finite() {
            push(id, Rule::NonFinite);
        } else if g.startup_cost < 0.0 {
            push(id, Rule::StartupNegative);
        }
        if !(g.x_max.is_finite() && g.x_max > 0.0) {
            push(id, Rule::CapacityNotPositive);
            capacity_ok = false;
        }
        for rule in curve_violations(&g.curve, g.x_max) {
            push(id, rule);
        }
    }

    if capacity_ok
        && instance.demand.is_finite()
        && instance.demand > 0.0
        && instance.total_capacity() < instance.demand - tol
    {
        push(None, Rule::Infeasible);
    }

    out.sort_by(|a, b| {
        (&a.generator, a.rule.name()).cmp(&(&b.generator, b.rule.name()))
    });
    out.dedup();
    out
}

fn curve_violations(curve: &CostCurve, x_max: f64) -> Vec<Rule> {
    let mut out = Vec::new();
    match curve {
        CostCurve::Linear(a) => {
            if !a.is_finite() {
                out.push(Rule::NonFinite);
            } else if *a < 0.0 {
                out.push(Rule::Decreasing);
            }
        }
        CostCurve::Quadratic { a, q } => {
            if !(a.is_finite() && q.is_finite()) {
                out.push(Rule::NonFinite);
            } else if *a < 0.0 || *q < 0.0 {
                out.push(Rule::Decreasing);
            }
        }
        CostCurve::Pwl(points) => {
            if points.is_empty() {
                out.push(Rule::PwlEmpty);
                return out;
            }
            if points.iter().any(|(x, s)| !(x.is_finite() && s.is_finite())) {
                out.push(Rule::NonFinite);
                return out;
            }
            let mut prev_x = 0.0;
            let mut prev_s = f64::NEG_INFINITY;
            for &(x, s) in points {
                if x <= prev_x {
                    out.push(Rule::PwlNotAscending);
                }
                if s < 0.0 {
                    out.push(Rule::Decreasing);
                }
                if s < prev_s {
                    out.push(Rule::NonConvex);
                }
                prev_x = x;
                prev_s = s;
            }
            if x_max.is_finite() && prev_x < x_max {
                out.push(Rule::PwlShort);
            }
        }
    }
    out.sort();
    out.dedup();
    out
}
