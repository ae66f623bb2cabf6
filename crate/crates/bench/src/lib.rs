//! Seeded instance generators for the benchmarks.

use hullprice::{CostCurve, GeneratorSpec, MarketInstance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `n` units with mixed cost shapes and demand at 60% of capacity.
pub fn mixed_instance(n: usize, seed: u64) -> MarketInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let generators: Vec<GeneratorSpec> = (0..n)
        .map(|i| {
            let x_max = rng.gen_range(1.0..10.0);
            let curve = match i % 3 {
                0 => CostCurve::Linear(rng.gen_range(0.0..5.0)),
                1 => CostCurve::Quadratic {
                    a: rng.gen_range(0.0..3.0),
                    q: rng.gen_range(0.1..2.0),
                },
                _ => {
                    let s = rng.gen_range(0.0..3.0);
                    CostCurve::Pwl(vec![(0.5 * x_max, s), (x_max, s + rng.gen_range(0.0..2.0))])
                }
            };
            GeneratorSpec::new(format!("g{i:02}"), rng.gen_range(0.0..30.0), curve, x_max)
        })
        .collect();
    let demand = 0.6 * generators.iter().map(|g| g.x_max).sum::<f64>();
    MarketInstance::new(demand, generators)
}
