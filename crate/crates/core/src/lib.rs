//! Market clearing with non-convex generator costs: exact dispatch, convex
//! hull pricing and its modified variant restricted to contractible outputs.
//!
//! ```
//! use hullprice::{run_pipeline, CostCurve, GeneratorSpec, MarketInstance, PipelineOptions};
//!
//! let inst = MarketInstance::new(4.0, vec![GeneratorSpec::new("g", 12.0, CostCurve::Linear(1.0), 6.0)]);
//! let report = run_pipeline(&inst, &PipelineOptions::default()).unwrap();
//! assert!((report.chp.price_set.lo - 3.0).abs() < 1e-9);
//! assert!((report.mchp.price_set_limit.lo - 4.0).abs() < 1e-9);
//! ```

pub mod cost;
pub mod dual;
pub mod error;
pub mod market;
pub mod mchp;
pub mod numeric;
pub mod primal;
pub mod report;

pub use cost::{
    average_total_cost, cost_eval, ec_min, hull_cost, marginal_subdiff, profit, supply_correspondence, HulledCurve,
    ProfitOutcome,
};
pub use dual::{
    aggregate_supply, chp_price_set, dual_value, full_hulls, price_set, uplifts, GeneratorUplift, PriceSet,
    Representative, UpliftReport,
};
pub use error::{PricingError, Result};
pub use market::{
    parse_instance, parse_instance_with_tol, validate_instance, validate_instance_with_tol, CostCurve, GeneratorSpec,
    MarketInstance, Rule, Violation, API_TOL,
};
pub use mchp::{
    classify_lnmgu, contract_bounds, diagnostics, mchp_price_set_eps, mchp_price_set_limit, mchp_price_set_limit_with,
    mchp_uplifts, CaseTag, Check, ContractBound, Diagnostics, LimitPriceSet, LnmguPartition, MchpResult,
};
pub use numeric::{bisect, Interval};
pub use primal::{economic_dispatch, marginal_price_interval, solve_primal, DispatchSolution, ScheduleEntry};
pub use report::{
    canonical_json, load_sweep, parse_report, render_report, run_pipeline, PipelineOptions, PricingReport,
    ReportFormat, SweepPoint,
};
