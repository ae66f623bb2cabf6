//! Per-generator convex analysis.
//!
//! A generator with start-up cost `w` and convex variable cost `c` has the
//! non-convex cost `f(x) = w·θ(x) + c(x)` on `[0, cap]`, where `θ` is the unit
//! step at `x > 0`. Its closed convex hull is a ray from the origin up to the
//! knee (the minimal economic output, clipped to the cap) followed by `w + c`.
//! The profit function `π(p) = max_x p·x − f(x)` is the conjugate of either
//! form, and its subdifferential is the generator's supply correspondence.

use serde::{Deserialize, Serialize};

use crate::error::{PricingError, Result};
use crate::market::{CostCurve, GeneratorSpec};
use crate::numeric::Interval;

impl CostCurve {
    /// `(start, end, slope, c(start))` for each piecewise-linear segment.
    fn pwl_segments(points: &[(f64, f64)]) -> impl Iterator<Item = (f64, f64, f64, f64)> + '_ {
        let mut start = 0.0;
        let mut acc = 0.0;
        points.iter().map(move |&(end, slope)| {
            let seg = (start, end, slope, acc);
            acc += slope * (end - start);
            start = end;
            seg
        })
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            CostCurve::Linear(a) => a * x,
            CostCurve::Quadratic { a, q } => a * x + 0.5 * q * x * x,
            CostCurve::Pwl(points) => {
                let mut last = (0.0, 0.0, 0.0, 0.0);
                for seg @ (start, end, slope, c0) in Self::pwl_segments(points) {
                    if x <= end {
                        return c0 + slope * (x - start);
                    }
                    last = seg;
                }
                // past the last breakpoint: extend the final segment
                let (start, _, slope, c0) = last;
                c0 + slope * (x - start)
            }
        }
    }

    pub fn right_derivative(&self, x: f64) -> f64 {
        match self {
            CostCurve::Linear(a) => *a,
            CostCurve::Quadratic { a, q } => a + q * x.max(0.0),
            CostCurve::Pwl(points) => points
                .iter()
                .find(|(end, _)| *end > x)
                .or(points.last())
                .map_or(0.0, |(_, s)| *s),
        }
    }

    /// Left derivative; at the origin this falls back to the right derivative.
    pub fn left_derivative(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return self.right_derivative(0.0);
        }
        match self {
            CostCurve::Linear(a) => *a,
            CostCurve::Quadratic { a, q } => a + q * x,
            CostCurve::Pwl(points) => points
                .iter()
                .find(|(end, _)| *end >= x)
                .or(points.last())
                .map_or(0.0, |(_, s)| *s),
        }
    }

    /// Interior breakpoints (kinks) of a piecewise-linear curve; empty for
    /// smooth forms.
    pub fn kinks(&self) -> Vec<f64> {
        match self {
            CostCurve::Pwl(points) if points.len() > 1 => {
                points[..points.len() - 1].iter().map(|(x, _)| *x).collect()
            }
            _ => Vec::new(),
        }
    }

    /// The set of maximizers of `p·x − c(x)` over `[lo, hi]`.
    pub fn argmax_affine(&self, p: f64, lo: f64, hi: f64) -> Interval {
        // unconstrained maximizer set, possibly unbounded, then clipped
        let (left, right) = match self {
            CostCurve::Linear(a) | CostCurve::Quadratic { a, q: 0.0 } => linear_level_set(*a, p),
            CostCurve::Quadratic { a, q } => {
                let x = (p - a) / q;
                (x, x)
            }
            CostCurve::Pwl(points) => {
                let below = points.iter().take_while(|(_, s)| *s < p).count();
                let at_or_below = points.iter().take_while(|(_, s)| *s <= p).count();
                let end_of = |k: usize| match k {
                    0 => 0.0,
                    k if k == points.len() => f64::INFINITY,
                    k => points[k - 1].0,
                };
                (end_of(below), end_of(at_or_below))
            }
        };
        Interval::new(left.clamp(lo, hi), right.clamp(lo, hi))
    }
}

fn linear_level_set(a: f64, p: f64) -> (f64, f64) {
    if p < a {
        (0.0, 0.0)
    } else if p > a {
        (f64::INFINITY, f64::INFINITY)
    } else {
        (0.0, f64::INFINITY)
    }
}

fn check_domain(what: &'static str, x: f64, lo: f64, hi: f64) -> Result<()> {
    if x >= lo && x <= hi {
        Ok(())
    } else {
        Err(PricingError::Domain { what, value: x, lo, hi })
    }
}

/// `c(x) + w·[on]`.
pub fn cost_eval(gen: &GeneratorSpec, x: f64, on: bool) -> Result<f64> {
    check_domain("output", x, 0.0, gen.x_max)?;
    if !on {
        check_domain("output of an OFF unit", x, 0.0, 0.0)?;
    }
    Ok(gen.curve.value(x) + if on { gen.startup_cost } else { 0.0 })
}

/// `[∂₋c(x), ∂₊c(x)]`, one-sided at the ends of `[0, x_max]`.
pub fn marginal_subdiff(gen: &GeneratorSpec, x: f64) -> Result<Interval> {
    check_domain("output", x, 0.0, gen.x_max)?;
    let c = &gen.curve;
    Ok(if x == 0.0 {
        Interval::point(c.right_derivative(0.0))
    } else if x == gen.x_max {
        Interval::point(c.left_derivative(x))
    } else {
        Interval::new(c.left_derivative(x), c.right_derivative(x))
    })
}

/// `(w + c(x)) / x` for `0 < x ≤ x_max`.
pub fn average_total_cost(gen: &GeneratorSpec, x: f64) -> Result<f64> {
    if !(x > 0.0 && x <= gen.x_max) {
        return Err(PricingError::Domain {
            what: "output",
            value: x,
            lo: 0.0,
            hi: gen.x_max,
        });
    }
    Ok(atc(gen, x))
}

pub(crate) fn atc(gen: &GeneratorSpec, x: f64) -> f64 {
    (gen.startup_cost + gen.curve.value(x)) / x
}

/// Minimal economic output: the lowest `x` in `(0, x_max)` where average
/// total cost meets the marginal cost, `x_max` if there is none, and 0 for
/// units without start-up cost.
///
/// The condition is `h(x) = x·∂₊c(x) − w − c(x) ≥ 0` with `h` nondecreasing.
/// For the supported curves the infimum has a closed form: `h` is constant on
/// each linear segment, so only breakpoints are candidates, and for the
/// quadratic `h(x) = q·x²/2 − w`.
pub fn ec_min(gen: &GeneratorSpec) -> f64 {
    let w = gen.startup_cost;
    if w == 0.0 {
        return 0.0;
    }
    let x_max = gen.x_max;
    match &gen.curve {
        CostCurve::Linear(_) | CostCurve::Quadratic { q: 0.0, .. } => x_max,
        CostCurve::Quadratic { q, .. } => {
            let root = (2.0 * w / q).sqrt();
            if root < x_max {
                root
            } else {
                x_max
            }
        }
        CostCurve::Pwl(points) => points
            .windows(2)
            .map(|pair| (pair[0].0, pair[1].1))
            .take_while(|(b, _)| *b < x_max)
            .find(|&(b, next_slope)| b * next_slope - w - gen.curve.value(b) >= 0.0)
            .map_or(x_max, |(b, _)| b),
    }
}

/// Closed convex hull of `w·θ(x) + c(x)` on `[0, cap]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HulledCurve {
    /// Slope of the ray from the origin; the price at which the unit starts
    /// supplying.
    pub threshold_price: f64,
    pub knee: f64,
    pub cap: f64,
    pub startup_cost: f64,
    pub curve: CostCurve,
}

/// Profit at a given price together with where it is attained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfitOutcome {
    pub value: f64,
    /// Whether staying OFF is optimal.
    pub zero_optimal: bool,
    /// Optimal positive outputs, if any.
    pub active: Option<Interval>,
}

pub fn hull_cost(gen: &GeneratorSpec, cap: f64) -> Result<HulledCurve> {
    if !(cap > 0.0 && cap <= gen.x_max) {
        return Err(PricingError::Domain {
            what: "cap",
            value: cap,
            lo: 0.0,
            hi: gen.x_max,
        });
    }
    Ok(HulledCurve::new(gen, cap))
}

impl HulledCurve {
    pub(crate) fn new(gen: &GeneratorSpec, cap: f64) -> Self {
        let knee = ec_min(gen).min(cap);
        let threshold_price = if knee > 0.0 {
            atc(gen, knee)
        } else {
            gen.curve.right_derivative(0.0)
        };
        HulledCurve {
            threshold_price,
            knee,
            cap,
            startup_cost: gen.startup_cost,
            curve: gen.curve.clone(),
        }
    }

    /// `f^h(x)`; infinite outside `[0, cap]`.
    pub fn eval(&self, x: f64) -> f64 {
        if x < 0.0 || x > self.cap {
            f64::INFINITY
        } else if x <= self.knee {
            self.threshold_price * x
        } else {
            self.startup_cost + self.curve.value(x)
        }
    }

    /// Subdifferential of `f^h`; unbounded at the ends of the domain, `None`
    /// outside it.
    pub fn subdifferential(&self, x: f64) -> Option<Interval> {
        let c = &self.curve;
        let (k, cap, t) = (self.knee, self.cap, self.threshold_price);
        if x < 0.0 || x > cap {
            return None;
        }
        let left = if x <= k { t } else { c.left_derivative(x) };
        let right = if x < k { t } else { c.right_derivative(x) };
        Some(if x == 0.0 {
            Interval::new(f64::NEG_INFINITY, t)
        } else if x == cap {
            Interval::new(left, f64::INFINITY)
        } else {
            Interval::new(left, right)
        })
    }

    /// Maximizers of `p·x − c(x)` over `[knee, cap]`.
    fn active_set(&self, p: f64) -> Interval {
        self.curve.argmax_affine(p, self.knee, self.cap)
    }

    pub fn profit(&self, p: f64) -> ProfitOutcome {
        let t = self.threshold_price;
        if p < t {
            ProfitOutcome {
                value: 0.0,
                zero_optimal: true,
                active: None,
            }
        } else if p == t {
            ProfitOutcome {
                value: 0.0,
                zero_optimal: true,
                active: Some(self.active_set(p)),
            }
        } else {
            let active = self.active_set(p);
            let x = active.lo;
            let w = if x > 0.0 { self.startup_cost } else { 0.0 };
            ProfitOutcome {
                value: (p * x - w - self.curve.value(x)).max(0.0),
                zero_optimal: x == 0.0,
                active: Some(active),
            }
        }
    }

    /// `∂π(p)`: the profit-maximizing outputs.
    pub fn supply(&self, p: f64) -> Interval {
        let t = self.threshold_price;
        if p < t {
            Interval::ZERO
        } else if p == t {
            Interval::new(0.0, self.active_set(p).hi)
        } else {
            self.active_set(p)
        }
    }
}

/// Maximum of `p·x − w·θ(x) − c(x)` over `{0} ∪ (0, cap]`.
pub fn profit(gen: &GeneratorSpec, p: f64, cap: f64) -> Result<ProfitOutcome> {
    Ok(hull_cost(gen, cap)?.profit(p))
}

pub fn supply_correspondence(gen: &GeneratorSpec, p: f64, cap: f64) -> Result<Interval> {
    Ok(hull_cost(gen, cap)?.supply(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn single_unit() -> GeneratorSpec {
        GeneratorSpec::new("g", 12.0, CostCurve::Linear(1.0), 6.0)
    }

    fn quadratic_unit() -> GeneratorSpec {
        GeneratorSpec::new("g2", 16.0, CostCurve::Quadratic { a: 0.0, q: 1.0 }, 8.0)
    }

    #[test]
    fn cost_eval_cases() {
        assert_eq!(cost_eval(&single_unit(), 4.0, true).unwrap(), 16.0);
        assert_eq!(cost_eval(&single_unit(), 0.0, false).unwrap(), 0.0);
        assert_eq!(cost_eval(&quadratic_unit(), 3.0, true).unwrap(), 20.5);
        assert!(matches!(cost_eval(&single_unit(), 6.5, true), Err(PricingError::Domain { .. })));
        assert!(cost_eval(&single_unit(), -0.1, true).is_err());
        assert!(cost_eval(&single_unit(), 1.0, false).is_err());
    }

    #[test]
    fn marginal_subdiff_cases() {
        let quad = GeneratorSpec::new("q", 0.0, CostCurve::Quadratic { a: 0.0, q: 1.0 }, 5.0);
        assert_eq!(marginal_subdiff(&quad, 3.0).unwrap(), Interval::point(3.0));
        let pwl = GeneratorSpec::new("p", 0.0, CostCurve::Pwl(vec![(1.0, 2.0), (3.0, 5.0)]), 3.0);
        assert_eq!(marginal_subdiff(&pwl, 1.0).unwrap(), Interval::new(2.0, 5.0));
        assert_eq!(marginal_subdiff(&pwl, 0.0).unwrap(), Interval::point(2.0));
        assert_eq!(marginal_subdiff(&pwl, 3.0).unwrap(), Interval::point(5.0));
        let lin = GeneratorSpec::new("l", 0.0, CostCurve::Linear(1.0), 5.0);
        assert_eq!(marginal_subdiff(&lin, 2.7).unwrap(), Interval::point(1.0));
        assert!(marginal_subdiff(&lin, 5.1).is_err());
    }

    #[test]
    fn average_total_cost_cases() {
        assert_eq!(average_total_cost(&single_unit(), 6.0).unwrap(), 3.0);
        let free = GeneratorSpec::new("f", 0.0, CostCurve::Linear(1.0), 5.0);
        assert_eq!(average_total_cost(&free, 5.0).unwrap(), 1.0);
        let g3 = GeneratorSpec::new("g3", 22.4, CostCurve::Linear(0.0), 8.0);
        assert_abs_diff_eq!(average_total_cost(&g3, 8.0).unwrap(), 2.8, epsilon = 1e-12);
        assert!(average_total_cost(&single_unit(), 0.0).is_err());
        assert!(average_total_cost(&single_unit(), 7.0).is_err());
    }

    /// Lowest root of the nondecreasing `h(x) = x·∂₊c(x) − w − c(x)` by plain
    /// bisection, independent of the closed forms.
    fn ec_min_bisection(gen: &GeneratorSpec) -> f64 {
        if gen.startup_cost == 0.0 {
            return 0.0;
        }
        let c = &gen.curve;
        let h = |x: f64| x * c.right_derivative(x) - gen.startup_cost - c.value(x);
        let (mut lo, mut hi) = (0.0, gen.x_max);
        if h(hi * (1.0 - 1e-15)) < 0.0 {
            return gen.x_max;
        }
        while hi - lo > 1e-12 {
            let mid = 0.5 * (lo + hi);
            if h(mid) >= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    #[test]
    fn ec_min_cases() {
        assert_eq!(ec_min(&single_unit()), 6.0);
        let free = GeneratorSpec::new("f", 0.0, CostCurve::Quadratic { a: 1.0, q: 2.0 }, 5.0);
        assert_eq!(ec_min(&free), 0.0);
        assert_abs_diff_eq!(ec_min(&quadratic_unit()), 32f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(ec_min_bisection(&quadratic_unit()), 5.656854249492381, epsilon = 1e-9);
    }

    #[test]
    fn ec_min_pwl_breakpoint() {
        // slopes 1 then 4 at x=2: h = 2·4 − 3 − 2 = 3 ≥ 0, knee at the kink
        let g = GeneratorSpec::new("p", 3.0, CostCurve::Pwl(vec![(2.0, 1.0), (5.0, 4.0)]), 5.0);
        assert_eq!(ec_min(&g), 2.0);
        assert_abs_diff_eq!(ec_min_bisection(&g), 2.0, epsilon = 1e-9);
        // start-up cost too large for the kink: 2·4 − 9 − 2 < 0
        let g = GeneratorSpec::new("p", 9.0, CostCurve::Pwl(vec![(2.0, 1.0), (5.0, 4.0)]), 5.0);
        assert_eq!(ec_min(&g), 5.0);
    }

    #[test]
    fn hull_cases() {
        let h = hull_cost(&single_unit(), 6.0).unwrap();
        assert_eq!((h.threshold_price, h.knee), (3.0, 6.0));

        let quad = GeneratorSpec::new("q", 0.0, CostCurve::Quadratic { a: 0.5, q: 1.0 }, 4.0);
        let h = hull_cost(&quad, 4.0).unwrap();
        assert_eq!((h.threshold_price, h.knee), (0.5, 0.0));
        assert_eq!(h.eval(2.0), quad.curve.value(2.0));

        let h = hull_cost(&quadratic_unit(), 5.0).unwrap();
        assert_eq!(h.knee, 5.0);
        assert_abs_diff_eq!(h.threshold_price, 5.7, epsilon = 1e-12);
        // brute-force hull on a grid: minimal chord slope from the origin
        let grid_slope = (1..=10_000)
            .map(|k| 5.0 * k as f64 / 10_000.0)
            .map(|x| (16.0 + 0.5 * x * x) / x)
            .fold(f64::INFINITY, f64::min);
        assert_abs_diff_eq!(h.threshold_price, grid_slope, epsilon = 1e-6);

        assert!(hull_cost(&single_unit(), 0.0).is_err());
        assert!(hull_cost(&single_unit(), 6.5).is_err());
    }

    #[test]
    fn profit_cases() {
        let out = profit(&single_unit(), 3.0, 6.0).unwrap();
        assert_eq!(out.value, 0.0);
        assert!(out.zero_optimal);
        assert_eq!(out.active, Some(Interval::point(6.0)));

        for p in [-5.0, 0.0] {
            let out = profit(&single_unit(), p, 6.0).unwrap();
            assert_eq!((out.value, out.zero_optimal, out.active), (0.0, true, None));
        }

        // capped at demand: 5.6·4 − 16 − 8 < 0
        let out = profit(&quadratic_unit(), 5.6, 4.0).unwrap();
        assert_eq!((out.value, out.zero_optimal, out.active), (0.0, true, None));
        let grid_best = (0..=10_000)
            .map(|k| 4.0 * k as f64 / 10_000.0)
            .map(|x| if x > 0.0 { 5.6 * x - 16.0 - 0.5 * x * x } else { 0.0 })
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(grid_best, 0.0);
    }

    #[test]
    fn supply_cases() {
        let g = single_unit();
        assert_eq!(supply_correspondence(&g, 3.0, 6.0).unwrap(), Interval::new(0.0, 6.0));
        assert_eq!(supply_correspondence(&g, 2.9, 6.0).unwrap(), Interval::ZERO);
        assert_eq!(supply_correspondence(&g, 3.1, 6.0).unwrap(), Interval::point(6.0));

        let cap = 4.0 + 1e-3;
        let t = (16.0 + 0.5 * cap * cap) / cap;
        let h = hull_cost(&quadratic_unit(), cap).unwrap();
        assert_abs_diff_eq!(h.threshold_price, t, epsilon = 1e-12);
        assert_eq!(h.supply(t + 1e-6), Interval::point(cap));
        assert_eq!(h.supply(t - 1e-6), Interval::ZERO);

        let free = GeneratorSpec::new("f", 0.0, CostCurve::Linear(1.0), 5.0);
        assert_eq!(supply_correspondence(&free, 1.0, 5.0).unwrap(), Interval::new(0.0, 5.0));
    }

    #[test]
    fn pwl_argmax_on_flat_segment() {
        let c = CostCurve::Pwl(vec![(1.0, 1.0), (3.0, 2.0), (6.0, 4.0)]);
        assert_eq!(c.argmax_affine(2.0, 0.0, 6.0), Interval::new(1.0, 3.0));
        assert_eq!(c.argmax_affine(2.5, 0.0, 6.0), Interval::point(3.0));
        assert_eq!(c.argmax_affine(0.5, 0.0, 6.0), Interval::ZERO);
        assert_eq!(c.argmax_affine(9.0, 0.0, 5.0), Interval::point(5.0));
        assert_eq!(c.argmax_affine(2.0, 2.0, 6.0), Interval::new(2.0, 3.0));
    }

    fn arb_generator() -> impl Strategy<Value = GeneratorSpec> {
        let curve = prop_oneof![
            (0.0..5.0f64).prop_map(CostCurve::Linear),
            (0.0..3.0f64, 0.0..2.0f64).prop_map(|(a, q)| CostCurve::Quadratic { a, q }),
            prop::collection::vec((0.1..3.0f64, 0.0..2.0f64), 1..4).prop_map(|raw| {
                let (mut x, mut s) = (0.0, 0.0);
                CostCurve::Pwl(
                    raw.into_iter()
                        .map(|(dx, ds)| {
                            x += dx;
                            s += ds;
                            (x, s)
                        })
                        .collect(),
                )
            }),
        ];
        (prop_oneof![Just(0.0), 0.0..20.0f64], curve, 0.5..8.0f64).prop_map(|(w, curve, x_max)| {
            let x_max = match &curve {
                CostCurve::Pwl(p) => p.last().unwrap().0.min(x_max),
                _ => x_max,
            };
            GeneratorSpec::new("g", w, curve, x_max)
        })
    }

    fn raw_cost(g: &GeneratorSpec, x: f64) -> f64 {
        if x > 0.0 {
            g.startup_cost + g.curve.value(x)
        } else {
            0.0
        }
    }

    proptest! {
        #[test]
        fn ec_min_matches_bisection(g in arb_generator()) {
            let fast = ec_min(&g);
            let slow = ec_min_bisection(&g);
            prop_assert!((fast - slow).abs() < 1e-9 * g.x_max.max(1.0), "{fast} vs {slow}");
        }

        #[test]
        fn hull_dominance(g in arb_generator(), frac in 0.05..1.0f64) {
            let cap = g.x_max * frac;
            let h = hull_cost(&g, cap).unwrap();
            prop_assert_eq!(h.eval(0.0), 0.0);
            for k in 1..=1000 {
                let x = (cap * k as f64 / 1000.0).min(cap);
                let f = raw_cost(&g, x);
                prop_assert!(h.eval(x) <= f + 1e-9);
                if x >= h.knee {
                    prop_assert!((h.eval(x) - f).abs() <= 1e-9 * f.abs().max(1.0));
                }
            }
        }

        #[test]
        fn hull_is_convex(g in arb_generator(), frac in 0.05..1.0f64) {
            let cap = g.x_max * frac;
            let h = hull_cost(&g, cap).unwrap();
            let xs: Vec<f64> = (0..=200).map(|k| (cap * k as f64 / 200.0).min(cap)).collect();
            for w in xs.windows(3) {
                let mid = 0.5 * (h.eval(w[0]) + h.eval(w[2]));
                prop_assert!(h.eval(w[1]) <= mid + 1e-9 * mid.abs().max(1.0));
            }
        }

        #[test]
        fn conjugacy(g in arb_generator(), frac in 0.05..1.0f64, p in -1.0..15.0f64) {
            let cap = g.x_max * frac;
            let h = hull_cost(&g, cap).unwrap();
            let grid_hull = (0..=20_000)
                .map(|k| (cap * k as f64 / 20_000.0).min(cap))
                .map(|x| p * x - h.eval(x))
                .fold(f64::NEG_INFINITY, f64::max);
            let grid_raw = (0..=20_000)
                .map(|k| (cap * k as f64 / 20_000.0).min(cap))
                .map(|x| p * x - raw_cost(&g, x))
                .fold(f64::NEG_INFINITY, f64::max);
            let exact = h.profit(p).value;
            prop_assert!(exact >= grid_hull - 1e-9);
            prop_assert!(exact >= grid_raw - 1e-9);
            // grid error of a concave maximum is second order in the step
            let tol = 1e-6 + 20.0 * (cap / 20_000.0) * (p.abs() + h.curve.left_derivative(cap) + h.threshold_price);
            prop_assert!(exact - grid_hull <= tol, "{exact} vs {grid_hull}");
            prop_assert!(exact - grid_raw <= tol, "{exact} vs {grid_raw}");
        }

        #[test]
        fn supply_is_monotone(g in arb_generator(), p1 in -1.0..15.0f64, dp in 0.0..5.0f64) {
            let h = hull_cost(&g, g.x_max).unwrap();
            let (s1, s2) = (h.supply(p1), h.supply(p1 + dp));
            prop_assert!(s1.lo <= s2.lo && s1.hi <= s2.hi);
            if dp > 0.0 {
                prop_assert!(s1.hi <= s2.lo + 1e-12);
            }
        }

        #[test]
        fn supply_gap(mut g in arb_generator(), w in 0.1..20.0f64, p in -1.0..15.0f64) {
            g.startup_cost = w;
            let h = hull_cost(&g, g.x_max).unwrap();
            let s = h.supply(p);
            if p == h.threshold_price {
                prop_assert_eq!(s.lo, 0.0);
            } else {
                // nothing strictly between 0 and the knee
                prop_assert!(s.hi == 0.0 || s.lo >= h.knee);
            }
        }

        #[test]
        fn subgradient_inversion(g in arb_generator(), p in -1.0..15.0f64, u in 0.0..1.0f64) {
            let h = hull_cost(&g, g.x_max).unwrap();
            let s = h.supply(p);
            let x_in = s.lo + u * s.width();
            prop_assert!(h.subdifferential(x_in).unwrap().contains(p, 1e-9));
            let x = u * h.cap;
            let sub = h.subdifferential(x).unwrap();
            prop_assert_eq!(sub.contains(p, 0.0), h.supply(p).contains(x, 1e-12));
        }

        #[test]
        fn profit_at_argmax(g in arb_generator(), p in -1.0..15.0f64) {
            let h = hull_cost(&g, g.x_max).unwrap();
            let out = h.profit(p);
            prop_assert!(out.value >= 0.0);
            if let Some(a) = out.active {
                for x in [a.lo, a.hi] {
                    prop_assert!((p * x - raw_cost(&g, x) - out.value).abs() < 1e-9 * out.value.max(1.0));
                }
            }
        }
    }
}
