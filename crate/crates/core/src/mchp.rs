//! Modified convex hull pricing.
//!
//! Each generator's lost-profit opportunities are restricted to outputs it
//! could realize through bilateral contracting: per generator the interval
//! `[x_c_min, x_c_max]` with `x_c_max = min(d, x_max)`. Only units whose
//! minimal economic output exceeds `x_c_max` (large natural monopoly units,
//! LNMGUs) are affected. Their outputs are capped at `d + ε` and prices and
//! uplifts are taken as `ε → +0`.

use serde::{Deserialize, Serialize};

use crate::cost::{atc, ec_min, HulledCurve};
use crate::dual::{self, check_price, lost_profits, GeneratorUplift, PriceSet, UpliftReport};
use crate::error::Result;
use crate::market::{MarketInstance, API_TOL};
use crate::numeric::quantity_tol;
use crate::primal::DispatchSolution;

/// Default ε for the numeric cross-check, relative to demand.
pub const DEFAULT_RELATIVE_EPSILON: f64 = 1e-6;

/// Relative tolerance between the analytic limit and the small-ε price set.
pub const CROSS_CHECK_TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractBound {
    pub id: String,
    pub c_min: f64,
    pub c_max: f64,
}

/// `x_c_min = max(d − Σ_{j≠i} x_max_j, 0)`, `x_c_max = min(d, x_max_i)`.
pub fn contract_bounds(instance: &MarketInstance) -> Vec<ContractBound> {
    let d = instance.demand;
    let total = instance.total_capacity();
    instance
        .generators
        .iter()
        .map(|g| ContractBound {
            id: g.id.clone(),
            c_min: (d - (total - g.x_max)).max(0.0),
            c_max: d.min(g.x_max),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LnmguPartition {
    /// Units with minimal economic output above their contract maximum.
    pub large: Vec<String>,
    pub regular: Vec<String>,
    /// The LNMGU with the lowest average total cost at `d + ε`.
    pub min_avg_id: Option<String>,
    pub epsilon: f64,
    #[serde(skip)]
    large_idx: Vec<usize>,
    #[serde(skip)]
    min_idx: Option<usize>,
}

impl LnmguPartition {
    pub fn is_large(&self, id: &str) -> bool {
        self.large.iter().any(|l| l == id)
    }
}

fn default_epsilon(demand: f64) -> f64 {
    DEFAULT_RELATIVE_EPSILON * demand
}

/// Splits generators into LNMGUs and regular units and picks the LNMGU with
/// the lowest average cost at `d + ε`. An ε at or above
/// `min (x_ec_min − d)` over LNMGUs is halved down into range; a
/// non-positive ε is replaced by the default.
pub fn classify_lnmgu(instance: &MarketInstance, epsilon: f64, tol: f64) -> LnmguPartition {
    let d = instance.demand;
    let mut large_idx = Vec::new();
    let mut regular = Vec::new();
    let mut slack = f64::INFINITY;
    for (i, g) in instance.generators.iter().enumerate() {
        let knee = ec_min(g);
        if knee > d.min(g.x_max) + tol {
            large_idx.push(i);
            slack = slack.min(knee - d);
        } else {
            regular.push(g.id.clone());
        }
    }

    let mut eps = if epsilon > 0.0 && epsilon.is_finite() {
        epsilon
    } else {
        default_epsilon(d)
    };
    if eps >= slack {
        eps = 0.5 * slack;
    }

    let min_idx = large_idx
        .iter()
        .copied()
        .map(|i| (i, atc(&instance.generators[i], d + eps)))
        .min_by(|(i, a), (j, b)| {
            a.total_cmp(b)
                .then_with(|| instance.generators[*i].id.cmp(&instance.generators[*j].id))
        })
        .map(|(i, _)| i);

    LnmguPartition {
        large: large_idx.iter().map(|&i| instance.generators[i].id.clone()).collect(),
        regular,
        min_avg_id: min_idx.map(|i| instance.generators[i].id.clone()),
        epsilon: eps,
        large_idx,
        min_idx,
    }
}

/// Units of the reduced dual: regular units at full capacity plus the chosen
/// LNMGUs capped at `d + ε`.
fn eps_units(instance: &MarketInstance, partition: &LnmguPartition, all_large: bool) -> Vec<HulledCurve> {
    let cap = instance.demand + partition.epsilon;
    instance
        .generators
        .iter()
        .enumerate()
        .filter_map(|(i, g)| {
            if !partition.large_idx.contains(&i) {
                Some(HulledCurve::new(g, g.x_max))
            } else if all_large || partition.min_idx == Some(i) {
                Some(HulledCurve::new(g, cap.min(g.x_max)))
            } else {
                None
            }
        })
        .collect()
}

/// Price set of the ε-capped dual, with only the minimal-average-cost LNMGU
/// retained.
pub fn mchp_price_set_eps(instance: &MarketInstance, epsilon: f64) -> Result<(PriceSet, LnmguPartition)> {
    let partition = classify_lnmgu(instance, epsilon, API_TOL);
    let units = eps_units(instance, &partition, false);
    Ok((dual::price_set(&units, instance.demand)?, partition))
}

/// Same as [`mchp_price_set_eps`] but with every LNMGU kept in the dual.
pub fn mchp_price_set_eps_all_lnmgu(instance: &MarketInstance, partition: &LnmguPartition) -> Result<PriceSet> {
    dual::price_set(&eps_units(instance, partition, true), instance.demand)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseTag {
    /// An LNMGU sets the price alone.
    LnmguMarginal,
    /// The reduced system sets the lower end, the cheapest LNMGU the upper.
    IntervalUpperCapped,
    /// The reduced system clears demand below every LNMGU's average cost.
    LnmguIrrelevant,
    NoLnmgu,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossCheck {
    pub epsilon: f64,
    pub price_set: PriceSet,
    pub deviation: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitPriceSet {
    pub price_set: PriceSet,
    pub case: CaseTag,
    /// Lowest LNMGU average cost at output `d`, when any LNMGU exists.
    pub cap_price: Option<f64>,
    pub partition: LnmguPartition,
    pub cross_check: CrossCheck,
}

pub fn mchp_price_set_limit(instance: &MarketInstance) -> Result<LimitPriceSet> {
    mchp_price_set_limit_with(instance, None, API_TOL)
}

/// The `ε → +0` limit of the modified price set.
///
/// With `p̄` the lowest LNMGU average cost at `d` and `S_R` the supply of all
/// regular units: if `lo S_R(p̄) > d` the regular units clear demand on their
/// own; otherwise the set is `{p̄}`, widened down to the lower end of the
/// regular units' price set when that lies below `p̄`.
pub fn mchp_price_set_limit_with(
    instance: &MarketInstance,
    epsilon: Option<f64>,
    tol: f64,
) -> Result<LimitPriceSet> {
    let d = instance.demand;
    let eps = epsilon.unwrap_or_else(|| default_epsilon(d));
    let partition = classify_lnmgu(instance, eps, tol);
    let eps_set = dual::price_set(&eps_units(instance, &partition, false), d)?;

    let (price_set, case, cap_price) = if partition.large_idx.is_empty() {
        (dual::chp_price_set(instance)?, CaseTag::NoLnmgu, None)
    } else {
        let p_bar = partition
            .large_idx
            .iter()
            .map(|&i| atc(&instance.generators[i], d))
            .fold(f64::INFINITY, f64::min);
        let reduced: Vec<HulledCurve> = instance
            .generators
            .iter()
            .enumerate()
            .filter(|(i, _)| !partition.large_idx.contains(i))
            .map(|(_, g)| HulledCurve::new(g, g.x_max))
            .collect();
        let qtol = quantity_tol(d);
        let reduced_capacity: f64 = reduced.iter().map(|u| u.cap).sum();
        if dual::aggregate_supply(&reduced, p_bar).lo > d + qtol {
            (dual::price_set(&reduced, d)?, CaseTag::LnmguIrrelevant, Some(p_bar))
        } else {
            let reduced_set = if reduced_capacity >= d - qtol {
                Some(dual::price_set(&reduced, d)?)
            } else {
                None
            };
            match reduced_set {
                Some(r) if r.lo < p_bar => (
                    PriceSet::bounded(r.lo, p_bar),
                    CaseTag::IntervalUpperCapped,
                    Some(p_bar),
                ),
                _ => (PriceSet::singleton(p_bar), CaseTag::LnmguMarginal, Some(p_bar)),
            }
        }
    };

    let deviation = set_distance(&price_set, &eps_set);
    let scale = price_set.lo.abs().max(if price_set.unbounded_above { 0.0 } else { price_set.hi.abs() });
    let cross_check = CrossCheck {
        epsilon: partition.epsilon,
        price_set: eps_set,
        deviation,
        passed: deviation <= CROSS_CHECK_TOL * scale.max(1.0),
    };

    Ok(LimitPriceSet {
        price_set,
        case,
        cap_price,
        partition,
        cross_check,
    })
}

/// Largest endpoint difference; infinite if exactly one set is a ray.
pub fn set_distance(a: &PriceSet, b: &PriceSet) -> f64 {
    let lo = (a.lo - b.lo).abs();
    match (a.unbounded_above, b.unbounded_above) {
        (true, true) => lo,
        (false, false) => lo.max((a.hi - b.hi).abs()),
        _ => f64::INFINITY,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MchpResult {
    pub price_set_limit: PriceSet,
    pub case_tag: CaseTag,
    pub price_used: f64,
    pub uplifts: Vec<GeneratorUplift>,
    pub total_uplift: f64,
    pub epsilon_used: f64,
    pub lnmgu: Vec<String>,
    pub min_avg_id: Option<String>,
    pub cross_check: CrossCheck,
}

/// Modified uplifts at a price from the limit set. LNMGU opportunities are
/// capped at `d`; regular units keep their full range.
pub fn mchp_uplifts(
    instance: &MarketInstance,
    dispatch: &DispatchSolution,
    limit: &LimitPriceSet,
    p: f64,
) -> Result<MchpResult> {
    check_price(&limit.price_set, p)?;
    let d = instance.demand;
    let units: Vec<HulledCurve> = instance
        .generators
        .iter()
        .map(|g| {
            let cap = if limit.partition.is_large(&g.id) { d.min(g.x_max) } else { g.x_max };
            HulledCurve::new(g, cap)
        })
        .collect();
    let uplifts = lost_profits(instance, dispatch, &units, p);
    Ok(MchpResult {
        price_set_limit: limit.price_set,
        case_tag: limit.case,
        price_used: p,
        total_uplift: uplifts.iter().map(|u| u.uplift).sum(),
        uplifts,
        epsilon_used: limit.partition.epsilon,
        lnmgu: limit.partition.large.clone(),
        min_avg_id: limit.partition.min_avg_id.clone(),
        cross_check: limit.cross_check.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    pub checks: Vec<Check>,
}

impl Diagnostics {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn push(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(Check {
            name: name.to_owned(),
            passed,
            detail,
        });
    }
}

/// Structural checks relating the two pricing methods on one instance.
/// Failures are reported, never raised.
pub fn diagnostics(
    instance: &MarketInstance,
    dispatch: &DispatchSolution,
    chp_prices: &PriceSet,
    chp: &UpliftReport,
    mchp: &MchpResult,
) -> Diagnostics {
    let mut diag = Diagnostics::default();
    let partition = classify_lnmgu(instance, mchp.epsilon_used, API_TOL);

    let on_large: Vec<&str> = dispatch
        .schedule
        .iter()
        .filter(|e| e.on && e.output > 0.0 && partition.is_large(&e.id))
        .map(|e| e.id.as_str())
        .collect();
    diag.push(
        "at_most_one_lnmgu_on",
        on_large.len() <= 1,
        format!("committed LNMGUs: {on_large:?}"),
    );

    let reduction = if partition.large.len() > 1 {
        let one = dual::price_set(&eps_units(instance, &partition, false), instance.demand);
        let all = mchp_price_set_eps_all_lnmgu(instance, &partition);
        match (one, all) {
            (Ok(one), Ok(all)) => {
                let dev = set_distance(&one, &all);
                (dev < 1e-9, format!("endpoint change {dev:e}"))
            }
            (Err(e), _) | (_, Err(e)) => (false, e.to_string()),
        }
    } else {
        (true, "fewer than two LNMGUs".to_owned())
    };
    diag.push("lnmgu_reduction_invariance", reduction.0, reduction.1);

    let m = &mchp.price_set_limit;
    diag.push(
        "price_ordering",
        m.lo >= chp_prices.lo - 1e-9,
        format!("modified {m} vs convex hull {chp_prices}"),
    );

    diag.push(
        "uplift_dominance",
        mchp.total_uplift <= chp.total_uplift + 1e-6,
        format!("modified {} vs convex hull {}", mchp.total_uplift, chp.total_uplift),
    );

    diag.push(
        "zero_gap_preservation",
        chp.gap > 1e-6 || mchp.total_uplift.abs() <= 1e-6,
        format!("gap {} vs modified total {}", chp.gap, mchp.total_uplift),
    );

    let no_startup = instance.generators.iter().all(|g| g.startup_cost == 0.0);
    diag.push(
        "no_startup_equivalence",
        !no_startup || set_distance(m, chp_prices) <= 1e-9,
        if no_startup {
            format!("modified {m} vs convex hull {chp_prices}")
        } else {
            "start-up costs present".to_owned()
        },
    );

    let floor = -1e-9 * dispatch.total_cost.abs().max(1.0);
    let negative: Vec<&str> = chp
        .uplifts
        .iter()
        .chain(&mchp.uplifts)
        .filter(|u| u.uplift < floor)
        .map(|u| u.id.as_str())
        .collect();
    diag.push(
        "uplift_nonnegative",
        negative.is_empty(),
        format!("negative uplifts: {negative:?}"),
    );

    let cc = &mchp.cross_check;
    diag.push(
        "epsilon_cross_check",
        cc.passed,
        format!("eps {:e}: {} deviates by {:e}", cc.epsilon, cc.price_set, cc.deviation),
    );

    diag
}
