//! Convex hull pricing: the Lagrangian dual of the dispatch problem, its
//! price set, the duality gap and per-generator uplifts.

use serde::{Deserialize, Serialize};

use crate::cost::HulledCurve;
use crate::error::{PricingError, Result};
use crate::market::{GeneratorSpec, MarketInstance};
use crate::numeric::{bisect, quantity_tol, Interval};
use crate::primal::DispatchSolution;

/// Tolerance for accepting a price as a member of a computed price set.
pub const STALE_PRICE_TOL: f64 = 1e-6;

/// A closed interval of market prices. `hi` is infinite when the set is a
/// ray, which happens only when demand equals total capacity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriceSet {
    pub lo: f64,
    #[serde(with = "finite_or_null")]
    pub hi: f64,
    pub unbounded_above: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representative {
    #[default]
    Lo,
    Mid,
    Hi,
}

impl std::str::FromStr for Representative {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "lo" => Ok(Representative::Lo),
            "mid" => Ok(Representative::Mid),
            "hi" => Ok(Representative::Hi),
            other => Err(format!("unknown price representative '{other}' (expected lo, mid or hi)")),
        }
    }
}

impl PriceSet {
    pub fn singleton(p: f64) -> Self {
        PriceSet {
            lo: p,
            hi: p,
            unbounded_above: false,
        }
    }

    pub fn bounded(lo: f64, hi: f64) -> Self {
        PriceSet {
            lo,
            hi,
            unbounded_above: false,
        }
    }

    pub fn ray(lo: f64) -> Self {
        PriceSet {
            lo,
            hi: f64::INFINITY,
            unbounded_above: true,
        }
    }

    pub fn contains(&self, p: f64, tol: f64) -> bool {
        p >= self.lo - tol && (self.unbounded_above || p <= self.hi + tol)
    }

    pub fn is_singleton(&self) -> bool {
        !self.unbounded_above && self.lo == self.hi
    }

    /// A canonical member; rays always report their lower end.
    pub fn representative(&self, rep: Representative) -> f64 {
        if self.unbounded_above {
            return self.lo;
        }
        match rep {
            Representative::Lo => self.lo,
            Representative::Mid => 0.5 * (self.lo + self.hi),
            Representative::Hi => self.hi,
        }
    }
}

impl std::fmt::Display for PriceSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.unbounded_above {
            write!(f, "[{}, +inf)", self.lo)
        } else if self.lo == self.hi {
            write!(f, "{{{}}}", self.lo)
        } else {
            write!(f, "[{}, {}]", self.lo, self.hi)
        }
    }
}

mod finite_or_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorUplift {
    pub id: String,
    pub uplift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpliftReport {
    pub price_used: f64,
    pub uplifts: Vec<GeneratorUplift>,
    pub total_uplift: f64,
    pub dual_value: f64,
    pub gap: f64,
}

/// Hulls of every generator at full capacity.
pub fn full_hulls(gens: &[GeneratorSpec]) -> Vec<HulledCurve> {
    gens.iter().map(|g| HulledCurve::new(g, g.x_max)).collect()
}

/// Minkowski sum of the units' supply correspondences at price `p`.
pub fn aggregate_supply(units: &[HulledCurve], p: f64) -> Interval {
    units.iter().map(|u| u.supply(p)).sum()
}

/// Upper end of the price bracket: above it every unit supplies its cap.
fn price_ceiling(units: &[HulledCurve]) -> f64 {
    let avg = units
        .iter()
        .map(|u| (u.startup_cost + u.curve.value(u.cap)) / u.cap)
        .fold(0.0, f64::max);
    let marginal = units
        .iter()
        .map(|u| u.curve.left_derivative(u.cap))
        .fold(0.0, f64::max);
    avg.max(0.0) + marginal + 1.0
}

/// Maximizers of the dual: prices `p` with `d ∈ Σ ∂π_i(p)`.
pub fn price_set(units: &[HulledCurve], demand: f64) -> Result<PriceSet> {
    let capacity: f64 = units.iter().map(|u| u.cap).sum();
    let tol = quantity_tol(demand);
    if capacity < demand - tol {
        return Err(PricingError::Infeasible { demand, capacity });
    }
    let top = price_ceiling(units);
    let reaches = |p: f64| aggregate_supply(units, p).hi >= demand - tol;
    let exceeds = |p: f64| aggregate_supply(units, p).lo > demand + tol;

    let lo = if reaches(0.0) { 0.0 } else { bisect(0.0, top, reaches).1 };
    if !exceeds(top) {
        return Ok(PriceSet::ray(lo));
    }
    let hi = if exceeds(lo) { lo } else { bisect(lo, top, exceeds).0 };
    Ok(PriceSet::bounded(lo, hi))
}

/// `p·d − Σ π_i(p)`.
pub fn dual_value(units: &[HulledCurve], demand: f64, p: f64) -> f64 {
    p * demand - units.iter().map(|u| u.profit(p).value).sum::<f64>()
}

/// Lost profit of each generator at price `p`: its best profit over the
/// unit's (possibly capped) feasible set minus its profit under dispatch.
pub(crate) fn lost_profits(
    instance: &MarketInstance,
    dispatch: &DispatchSolution,
    units: &[HulledCurve],
    p: f64,
) -> Vec<GeneratorUplift> {
    instance
        .generators
        .iter()
        .zip(units)
        .zip(&dispatch.schedule)
        .map(|((g, unit), entry)| {
            let cost = g.curve.value(entry.output) + if entry.on { g.startup_cost } else { 0.0 };
            let dispatched = p * entry.output - cost;
            GeneratorUplift {
                id: g.id.clone(),
                uplift: unit.profit(p).value - dispatched,
            }
        })
        .collect()
}

pub(crate) fn check_price(set: &PriceSet, p: f64) -> Result<()> {
    if set.contains(p, STALE_PRICE_TOL) {
        Ok(())
    } else {
        Err(PricingError::StalePrice {
            price: p,
            lo: set.lo,
            hi: set.hi,
        })
    }
}

/// Per-generator uplifts, dual value and duality gap at a price from the
/// convex hull price set.
pub fn uplifts(
    instance: &MarketInstance,
    dispatch: &DispatchSolution,
    prices: &PriceSet,
    p: f64,
) -> Result<UpliftReport> {
    check_price(prices, p)?;
    let units = full_hulls(&instance.generators);
    let uplifts = lost_profits(instance, dispatch, &units, p);
    let dual = dual_value(&units, instance.demand, p);
    Ok(UpliftReport {
        price_used: p,
        total_uplift: uplifts.iter().map(|u| u.uplift).sum(),
        uplifts,
        dual_value: dual,
        gap: dispatch.total_cost - dual,
    })
}

/// Convex hull price set of an instance.
pub fn chp_price_set(instance: &MarketInstance) -> Result<PriceSet> {
    price_set(&full_hulls(&instance.generators), instance.demand)
}
