//! Fixtures, seeded instance generators and brute-force oracles shared by the
//! integration tests. Oracles deliberately avoid the library's hull and
//! bisection code: they evaluate raw costs at candidate outputs.

#![allow(dead_code)]

use hullprice::{CostCurve, GeneratorSpec, MarketInstance};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn single_unit() -> MarketInstance {
    MarketInstance::new(4.0, vec![GeneratorSpec::new("g", 12.0, CostCurve::Linear(1.0), 6.0)])
}

pub fn three_unit() -> MarketInstance {
    MarketInstance::new(
        4.0,
        vec![
            GeneratorSpec::new("g1", 0.0, CostCurve::Linear(0.0), 1.0),
            GeneratorSpec::new("g2", 16.0, CostCurve::Quadratic { a: 0.0, q: 1.0 }, 8.0),
            GeneratorSpec::new("g3", 22.4, CostCurve::Linear(0.0), 8.0),
        ],
    )
}

/// Two units: `g1` large with start-up cost, `g2` cheap-to-start but dearer
/// at the margin, with the given capacity.
pub fn two_unit(x2_max: f64) -> MarketInstance {
    MarketInstance::new(
        4.0,
        vec![
            GeneratorSpec::new("g1", 12.0, CostCurve::Linear(1.0), 12.0),
            GeneratorSpec::new("g2", 0.0, CostCurve::Linear(3.0), x2_max),
        ],
    )
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_curve(rng: &mut ChaCha8Rng, x_max: f64) -> CostCurve {
    match rng.gen_range(0..3) {
        0 => CostCurve::Linear(rng.gen_range(0.0..5.0)),
        1 => CostCurve::Quadratic {
            a: rng.gen_range(0.0..3.0),
            q: rng.gen_range(0.05..2.0),
        },
        _ => {
            let segments = rng.gen_range(1..=3);
            let mut cuts: Vec<f64> = (1..segments).map(|_| rng.gen_range(0.05..0.95) * x_max).collect();
            cuts.sort_by(f64::total_cmp);
            cuts.dedup();
            cuts.push(x_max);
            let mut slope = rng.gen_range(0.0..3.0);
            CostCurve::Pwl(
                cuts.into_iter()
                    .map(|b| {
                        let point = (b, slope);
                        slope += rng.gen_range(0.0..2.0);
                        point
                    })
                    .collect(),
            )
        }
    }
}

fn random_startup(rng: &mut ChaCha8Rng) -> f64 {
    if rng.gen_bool(0.25) {
        0.0
    } else {
        rng.gen_range(0.0..30.0)
    }
}

/// Mixed linear/quadratic/PWL instance with 1..=4 units. About one in
/// twenty has demand equal to total capacity.
pub fn random_instance(rng: &mut ChaCha8Rng) -> MarketInstance {
    let n = rng.gen_range(1..=4);
    let generators: Vec<GeneratorSpec> = (0..n)
        .map(|i| {
            let x_max = rng.gen_range(0.5..10.0);
            let curve = random_curve(rng, x_max);
            GeneratorSpec::new(format!("g{i}"), random_startup(rng), curve, x_max)
        })
        .collect();
    let capacity: f64 = generators.iter().map(|g| g.x_max).sum();
    let demand = if rng.gen_bool(0.05) {
        capacity
    } else {
        rng.gen_range(0.05..0.95) * capacity
    };
    MarketInstance::new(demand, generators)
}

/// Same instance with every start-up cost removed.
pub fn without_startup(inst: &MarketInstance) -> MarketInstance {
    let mut out = inst.clone();
    for g in &mut out.generators {
        g.startup_cost = 0.0;
    }
    out
}

/// Linear/PWL instance whose breakpoints, capacities and demand are all
/// multiples of `1/GRID_DENOM`, so outputs on that grid contain an optimum.
pub const GRID_DENOM: f64 = 4.0;

pub fn grid_instance(rng: &mut ChaCha8Rng) -> MarketInstance {
    let n = rng.gen_range(1..=4);
    let caps = [1.0, 2.0, 4.0, 5.0, 8.0, 10.0];
    let generators: Vec<GeneratorSpec> = (0..n)
        .map(|i| {
            let x_max = caps[rng.gen_range(0..caps.len())];
            let curve = if rng.gen_bool(0.4) {
                CostCurve::Linear(rng.gen_range(0.0..5.0))
            } else {
                let ticks = (x_max * GRID_DENOM) as u32;
                let mut cuts: Vec<u32> = (0..rng.gen_range(0..3)).map(|_| rng.gen_range(1..ticks.max(2))).collect();
                cuts.retain(|&c| c < ticks);
                cuts.sort_unstable();
                cuts.dedup();
                cuts.push(ticks);
                let mut slope = rng.gen_range(0.0..3.0);
                CostCurve::Pwl(
                    cuts.into_iter()
                        .map(|c| {
                            let point = (c as f64 / GRID_DENOM, slope);
                            slope += rng.gen_range(0.0..2.0);
                            point
                        })
                        .collect(),
                )
            };
            GeneratorSpec::new(format!("g{i}"), random_startup(rng), curve, x_max)
        })
        .collect();
    let capacity: f64 = generators.iter().map(|g| g.x_max).sum();
    let ticks = (capacity * GRID_DENOM) as u32;
    let demand = rng.gen_range(1..=ticks) as f64 / GRID_DENOM;
    MarketInstance::new(demand, generators)
}

pub fn raw_cost(g: &GeneratorSpec, x: f64) -> f64 {
    if x > 0.0 {
        g.startup_cost + g.curve.value(x)
    } else {
        0.0
    }
}

/// Outputs at which `p·x − c(x)` can peak on `(0, cap]`: the cap, every
/// breakpoint below it and, for a quadratic, the stationary point.
pub fn candidate_outputs(g: &GeneratorSpec, p: f64, cap: f64) -> Vec<f64> {
    let mut xs = vec![cap];
    match &g.curve {
        CostCurve::Pwl(points) => xs.extend(points.iter().map(|(b, _)| *b).filter(|&b| b > 0.0 && b < cap)),
        CostCurve::Quadratic { a, q } if *q > 0.0 => {
            let x = (p - a) / q;
            if x > 0.0 && x < cap {
                xs.push(x);
            }
        }
        _ => {}
    }
    xs
}

/// `max(0, max_{x ∈ (0, cap]} p·x − w − c(x))` by exhaustive candidates.
pub fn profit_oracle(g: &GeneratorSpec, p: f64, cap: f64) -> f64 {
    candidate_outputs(g, p, cap)
        .into_iter()
        .map(|x| p * x - raw_cost(g, x))
        .fold(0.0, f64::max)
}

/// Same as [`profit_oracle`] but restricted to an output grid of `points`
/// steps plus the curve's breakpoints.
pub fn grid_profit_oracle(g: &GeneratorSpec, p: f64, cap: f64, points: usize) -> f64 {
    let mut best = 0.0f64;
    for k in 1..=points {
        let x = (cap * k as f64 / points as f64).min(cap);
        best = best.max(p * x - raw_cost(g, x));
    }
    if let CostCurve::Pwl(pts) = &g.curve {
        for &(b, _) in pts {
            if b > 0.0 && b <= cap {
                best = best.max(p * b - raw_cost(g, b));
            }
        }
    }
    best
}

/// `p·d − Σ π_i(p)` with each unit capped as given.
pub fn dual_oracle(units: &[(&GeneratorSpec, f64)], demand: f64, p: f64, profit: impl Fn(&GeneratorSpec, f64, f64) -> f64) -> f64 {
    p * demand - units.iter().map(|(g, cap)| profit(g, p, *cap)).sum::<f64>()
}

/// Upper end of the price search range: no unit earns a strictly larger
/// marginal return above this.
pub fn price_ceiling(units: &[(&GeneratorSpec, f64)]) -> f64 {
    let avg = units
        .iter()
        .map(|(g, cap)| raw_cost(g, *cap) / cap)
        .fold(0.0, f64::max);
    let slope = units
        .iter()
        .map(|(g, cap)| match &g.curve {
            CostCurve::Linear(a) => *a,
            CostCurve::Quadratic { a, q } => a + q * cap,
            CostCurve::Pwl(points) => points.last().unwrap().1,
        })
        .fold(0.0, f64::max);
    avg + slope + 1.0
}

/// First maximizer of `f` over `steps + 1` evenly spaced prices in
/// `[0, top]`, and the spacing.
pub fn grid_argmax(top: f64, steps: usize, f: impl Fn(f64) -> f64) -> (f64, f64) {
    let step = top / steps as f64;
    let mut best = (f64::NEG_INFINITY, 0.0);
    for k in 0..=steps {
        let p = k as f64 * step;
        let v = f(p);
        if v > best.0 {
            best = (v, p);
        }
    }
    (best.1, step)
}

/// Lowest minimizer of average total cost `(w + c(x))/x` on `(0, x_max]`,
/// by candidate enumeration plus ternary search for quadratics.
pub fn ec_min_oracle(g: &GeneratorSpec) -> f64 {
    if g.startup_cost == 0.0 {
        return 0.0;
    }
    let atc = |x: f64| raw_cost(g, x) / x;
    let mut xs = vec![g.x_max];
    match &g.curve {
        CostCurve::Pwl(points) => xs.extend(points.iter().map(|(b, _)| *b).filter(|&b| b > 0.0 && b < g.x_max)),
        CostCurve::Quadratic { q, .. } if *q > 0.0 => {
            let (mut lo, mut hi) = (1e-12, g.x_max);
            for _ in 0..300 {
                let m1 = lo + (hi - lo) / 3.0;
                let m2 = hi - (hi - lo) / 3.0;
                if atc(m1) <= atc(m2) {
                    hi = m2;
                } else {
                    lo = m1;
                }
            }
            xs.push(0.5 * (lo + hi));
        }
        _ => {}
    }
    xs.sort_by(f64::total_cmp);
    let best = xs.iter().map(|&x| atc(x)).fold(f64::INFINITY, f64::min);
    xs.into_iter()
        .find(|&x| atc(x) <= best + 1e-12 * best.abs().max(1.0))
        .unwrap()
}

/// Minimum total cost over outputs on a grid of spacing `1/denom`, by
/// dynamic programming over units. `None` if the grid cannot meet demand.
pub fn primal_grid_oracle(inst: &MarketInstance, denom: f64) -> Option<f64> {
    let target = (inst.demand * denom).round() as usize;
    let mut best = vec![f64::INFINITY; target + 1];
    best[0] = 0.0;
    for g in &inst.generators {
        let max_ticks = ((g.x_max * denom).floor() as usize).min(target);
        let costs: Vec<f64> = (0..=max_ticks).map(|k| raw_cost(g, k as f64 / denom)).collect();
        let mut next = vec![f64::INFINITY; target + 1];
        for (used, &base) in best.iter().enumerate() {
            if base.is_infinite() {
                continue;
            }
            for (k, &c) in costs.iter().enumerate().take(target - used + 1) {
                let slot = &mut next[used + k];
                *slot = slot.min(base + c);
            }
        }
        best = next;
    }
    best[target].is_finite().then_some(best[target])
}

/// Prints one verdict line for an acceptance criterion and fails the test
/// when any sub-check failed.
pub fn verdict(id: &str, title: &str, checks: &[(String, bool)]) {
    let failed: Vec<&String> = checks.iter().filter(|(_, ok)| !ok).map(|(name, _)| name).collect();
    if failed.is_empty() {
        println!("criterion {id}: PASS  {title} ({} checks)", checks.len());
    } else {
        println!("criterion {id}: FAIL  {title}");
        for f in &failed {
            println!("    failed: {f}");
        }
    }
    assert!(failed.is_empty(), "criterion {id} failed: {failed:?}");
}

pub fn close(got: f64, want: f64, tol: f64) -> bool {
    (got - want).abs() <= tol
}
