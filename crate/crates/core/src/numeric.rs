//! Closed intervals and monotone bisection.

use serde::{Deserialize, Serialize};

/// Upper bound on bisection steps; enough to reach adjacent floats on any
/// finite bracket.
pub const MAX_BISECTION_STEPS: usize = 200;

/// Absolute tolerance used when comparing supplied quantity against demand,
/// scaled by `max(1, demand)`.
pub const QUANTITY_TOL: f64 = 1e-9;

pub(crate) fn quantity_tol(demand: f64) -> f64 {
    QUANTITY_TOL * demand.abs().max(1.0)
}

/// A closed interval `[lo, hi]`. Degenerate intervals are points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "interval [{lo}, {hi}] is inverted");
        Interval { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };

    pub fn contains(&self, x: f64, tol: f64) -> bool {
        x >= self.lo - tol && x <= self.hi + tol
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn clamp_to(&self, lo: f64, hi: f64) -> Interval {
        Interval {
            lo: self.lo.clamp(lo, hi),
            hi: self.hi.clamp(lo, hi),
        }
    }
}

/// Minkowski sum.
impl std::ops::Add for Interval {
    type Output = Interval;

    fn add(self, rhs: Interval) -> Interval {
        Interval {
            lo: self.lo + rhs.lo,
            hi: self.hi + rhs.hi,
        }
    }
}

impl std::iter::Sum for Interval {
    fn sum<I: Iterator<Item = Interval>>(iter: I) -> Interval {
        iter.fold(Interval::ZERO, |a, b| a + b)
    }
}

/// Locates the switch point of a predicate that is false at `lo`, true at
/// `hi`, and monotone in between. Returns `(last_false, first_true)`; the two
/// are adjacent floats unless the step budget ran out first.
pub fn bisect<F>(mut lo: f64, mut hi: f64, mut pred: F) -> (f64, f64)
where
    F: FnMut(f64) -> bool,
{
    debug_assert!(lo <= hi);
    for _ in 0..MAX_BISECTION_STEPS {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo, hi)
}
