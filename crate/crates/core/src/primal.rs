//! Exact centralized dispatch: commitment enumeration over convex economic
//! dispatch subproblems.

use serde::{Deserialize, Serialize};

use crate::error::{PricingError, Result};
use crate::market::{GeneratorSpec, MarketInstance};
use crate::numeric::{bisect, quantity_tol, Interval};

/// Enumeration guard on the number of generators.
pub const MAX_ENUMERATED_UNITS: usize = 24;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleEntry {
    pub id: String,
    pub on: bool,
    pub output: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispatchSolution {
    pub total_cost: f64,
    /// One entry per generator, in instance order.
    pub schedule: Vec<ScheduleEntry>,
    pub committed: Vec<String>,
    /// Equal-incremental-cost multiplier of the winning dispatch.
    pub marginal_lambda: f64,
}

impl DispatchSolution {
    pub fn entry(&self, id: &str) -> Option<&ScheduleEntry> {
        self.schedule.iter().find(|e| e.id == id)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EconomicDispatch {
    pub outputs: Vec<f64>,
    pub lambda: f64,
    /// `Σ c_i(x_i)`, start-up costs excluded.
    pub variable_cost: f64,
}

fn level_supply(gens: &[&GeneratorSpec], lambda: f64) -> Interval {
    gens.iter()
        .map(|g| g.curve.argmax_affine(lambda, 0.0, g.x_max))
        .sum()
}

/// Minimizes `Σ c_i(x_i)` subject to `Σ x_i = d` and `0 ≤ x_i ≤ x_max,i`
/// with every unit ON, by bisection on the common incremental cost λ.
///
/// Demand left over at the switching λ goes to indifferent units in id
/// order.
pub fn economic_dispatch(gens: &[&GeneratorSpec], demand: f64) -> Result<EconomicDispatch> {
    let capacity: f64 = gens.iter().map(|g| g.x_max).sum();
    let tol = quantity_tol(demand);
    if capacity < demand - tol {
        return Err(PricingError::Infeasible { demand, capacity });
    }
    if demand <= 0.0 {
        return Ok(EconomicDispatch {
            outputs: vec![0.0; gens.len()],
            lambda: gens
                .iter()
                .map(|g| g.curve.right_derivative(0.0))
                .fold(f64::INFINITY, f64::min),
            variable_cost: 0.0,
        });
    }

    let bottom = gens
        .iter()
        .map(|g| g.curve.right_derivative(0.0))
        .fold(f64::INFINITY, f64::min)
        - 1.0;
    let top = gens
        .iter()
        .map(|g| g.curve.left_derivative(g.x_max))
        .fold(f64::NEG_INFINITY, f64::max)
        + 1.0;
    let (below, lambda) = bisect(bottom, top, |l| level_supply(gens, l).hi >= demand);

    let base: Vec<f64> = gens
        .iter()
        .map(|g| g.curve.argmax_affine(below, 0.0, g.x_max).hi)
        .collect();
    let room: Vec<f64> = gens
        .iter()
        .zip(&base)
        .map(|(g, b)| (g.curve.argmax_affine(lambda, 0.0, g.x_max).hi - b).max(0.0))
        .collect();

    let mut outputs = base;
    let mut residual = demand - outputs.iter().sum::<f64>();
    let mut order: Vec<usize> = (0..gens.len()).collect();
    order.sort_by(|&a, &b| gens[a].id.cmp(&gens[b].id));
    for &i in &order {
        if residual <= 0.0 {
            break;
        }
        let take = residual.min(room[i]);
        outputs[i] += take;
        residual -= take;
    }
    // capacity slack within tolerance
    if residual > 0.0 {
        for &i in &order {
            let take = residual.min(gens[i].x_max - outputs[i]).max(0.0);
            outputs[i] += take;
            residual -= take;
        }
    }

    let variable_cost = gens
        .iter()
        .zip(&outputs)
        .map(|(g, &x)| g.curve.value(x))
        .sum();
    Ok(EconomicDispatch {
        outputs,
        lambda,
        variable_cost,
    })
}

/// The interval of equal-incremental-cost prices clearing demand when every
/// unit runs without start-up cost.
pub fn marginal_price_interval(gens: &[&GeneratorSpec], demand: f64) -> Result<Interval> {
    let capacity: f64 = gens.iter().map(|g| g.x_max).sum();
    let tol = quantity_tol(demand);
    if capacity < demand - tol {
        return Err(PricingError::Infeasible { demand, capacity });
    }
    let top = gens
        .iter()
        .map(|g| g.curve.left_derivative(g.x_max))
        .fold(0.0, f64::max)
        + 1.0;
    let lo = if level_supply(gens, 0.0).hi >= demand - tol {
        0.0
    } else {
        bisect(0.0, top, |l| level_supply(gens, l).hi >= demand - tol).1
    };
    let hi = if level_supply(gens, top).lo <= demand + tol {
        f64::INFINITY
    } else {
        bisect(lo, top, |l| level_supply(gens, l).lo > demand + tol).0
    };
    Ok(Interval::new(lo, hi))
}

struct Search<'a> {
    instance: &'a MarketInstance,
    /// Units ordered by id; ties between equal-cost schedules prefer fewer
    /// units, then the lexicographically smaller id list.
    order: Vec<usize>,
    suffix_capacity: Vec<f64>,
    tol: f64,
    best: Option<Candidate>,
}

struct Candidate {
    cost: f64,
    members: Vec<usize>,
    dispatch: EconomicDispatch,
}

impl Search<'_> {
    fn cost_tol(&self, cost: f64) -> f64 {
        1e-9 * cost.abs().max(1.0)
    }

    fn incumbent(&self) -> f64 {
        self.best.as_ref().map_or(f64::INFINITY, |b| b.cost)
    }

    fn visit(&mut self, depth: usize, members: &mut Vec<usize>, fixed: f64, capacity: f64) {
        let demand = self.instance.demand;
        if fixed > self.incumbent() + self.cost_tol(fixed) {
            return;
        }
        if capacity + self.suffix_capacity[depth] < demand - self.tol {
            return;
        }
        if depth == self.order.len() {
            self.evaluate(members, fixed);
            return;
        }
        let i = self.order[depth];
        let g = &self.instance.generators[i];
        members.push(i);
        self.visit(depth + 1, members, fixed + g.startup_cost, capacity + g.x_max);
        members.pop();
        self.visit(depth + 1, members, fixed, capacity);
    }

    fn evaluate(&mut self, members: &[usize], fixed: f64) {
        let gens: Vec<&GeneratorSpec> = members.iter().map(|&i| &self.instance.generators[i]).collect();
        let Ok(dispatch) = economic_dispatch(&gens, self.instance.demand) else {
            return;
        };
        let cost = fixed + dispatch.variable_cost;
        let better = match &self.best {
            None => true,
            Some(b) => {
                let tol = self.cost_tol(b.cost);
                cost < b.cost - tol
                    || (cost <= b.cost + tol && self.tie_key(members) < self.tie_key(&b.members))
            }
        };
        if better {
            self.best = Some(Candidate {
                cost,
                members: members.to_vec(),
                dispatch,
            });
        }
    }

    fn tie_key(&self, members: &[usize]) -> (usize, Vec<&str>) {
        let mut ids: Vec<&str> = members
            .iter()
            .map(|&i| self.instance.generators[i].id.as_str())
            .collect();
        ids.sort_unstable();
        (members.len(), ids)
    }
}

/// Global optimum of the centralized dispatch problem over all commitments.
pub fn solve_primal(instance: &MarketInstance) -> Result<DispatchSolution> {
    let n = instance.generators.len();
    if n > MAX_ENUMERATED_UNITS {
        return Err(PricingError::Size {
            n,
            max: MAX_ENUMERATED_UNITS,
        });
    }
    let demand = instance.demand;
    let capacity = instance.total_capacity();
    let tol = quantity_tol(demand);
    if capacity < demand - tol {
        return Err(PricingError::Infeasible { demand, capacity });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| instance.generators[a].id.cmp(&instance.generators[b].id));
    let mut suffix_capacity = vec![0.0; n + 1];
    for k in (0..n).rev() {
        suffix_capacity[k] = suffix_capacity[k + 1] + instance.generators[order[k]].x_max;
    }

    let mut search = Search {
        instance,
        order,
        suffix_capacity,
        tol,
        best: None,
    };
    search.visit(0, &mut Vec::new(), 0.0, 0.0);
    let best = search
        .best
        .ok_or(PricingError::Infeasible { demand, capacity })?;

    let mut schedule: Vec<ScheduleEntry> = instance
        .generators
        .iter()
        .map(|g| ScheduleEntry {
            id: g.id.clone(),
            on: false,
            output: 0.0,
        })
        .collect();
    for (&i, &x) in best.members.iter().zip(&best.dispatch.outputs) {
        schedule[i].on = true;
        schedule[i].output = x;
    }
    let mut committed: Vec<String> = best
        .members
        .iter()
        .map(|&i| instance.generators[i].id.clone())
        .collect();
    committed.sort();

    Ok(DispatchSolution {
        total_cost: best.cost,
        schedule,
        committed,
        marginal_lambda: best.dispatch.lambda,
    })
}
