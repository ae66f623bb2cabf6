use thiserror::Error;

use crate::market::Violation;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PricingError {
    /// Malformed JSON or missing/unknown fields.
    #[error("schema error: {0}")]
    Schema(String),

    #[error("validation failed: {}", join_violations(.0))]
    Validation(Vec<Violation>),

    #[error("{what} = {value} outside domain [{lo}, {hi}]")]
    Domain {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("infeasible: demand {demand} exceeds total capacity {capacity}")]
    Infeasible { demand: f64, capacity: f64 },

    #[error("{n} generators exceed the enumeration limit of {max}")]
    Size { n: usize, max: usize },

    #[error("price {price} lies outside the price set [{lo}, {hi}]")]
    StalePrice { price: f64, lo: f64, hi: f64 },

    #[error("unknown report format '{0}'")]
    UnknownFormat(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<PricingError>,
    },
}

impl PricingError {
    pub(crate) fn at(stage: &'static str) -> impl FnOnce(PricingError) -> PricingError {
        move |source| PricingError::Stage {
            stage,
            source: Box::new(source),
        }
    }

    /// The innermost error, with stage labels stripped.
    pub fn root(&self) -> &PricingError {
        match self {
            PricingError::Stage { source, .. } => source.root(),
            other => other,
        }
    }

    /// True for infeasibility, whether reported by the solver or by validation.
    pub fn is_infeasible(&self) -> bool {
        match self.root() {
            PricingError::Infeasible { .. } => true,
            PricingError::Validation(v) => v.iter().any(|v| v.rule == crate::market::Rule::Infeasible),
            _ => false,
        }
    }
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

pub type Result<T, E = PricingError> = std::result::Result<T, E>;
