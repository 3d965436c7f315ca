//! Ranking topologies from replicated runs and comparing the rankings.

mod features;
mod kendall;
mod preorder;
mod special;
mod welch;

pub use features::{feature_preorder, Direction, Feature};
pub use kendall::{kendall_tau_b, KendallResult};
pub use preorder::{
    best_worst, build_preorder_basic, build_preorder_extended, preorder_height, validate_relation,
    Preorder, Relation, TestOptions, ValidationReport,
};
pub use special::{ln_gamma, regularized_incomplete_beta, student_t_cdf};
pub use welch::{welch_test, Sidedness, WelchResult};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("each sample needs at least 2 values (got {a} and {b})")]
    TooFewSamples { a: usize, b: usize },
    #[error("alpha must lie in [0, 1), got {0}")]
    InvalidAlpha(f64),
    #[error("window must lie in (0, 1], got {0}")]
    InvalidWindow(f64),
    #[error("'{label}' has {got} periods, expected {expected}")]
    PeriodMismatch {
        label: String,
        expected: usize,
        got: usize,
    },
    #[error("relation is not a strict partial order: {report}")]
    RelationInvalid {
        preorder: Box<Preorder>,
        report: ValidationReport,
    },
    #[error("every pair is tied in at least one preorder; tau_b is undefined")]
    AllTied,
    #[error("preorders rank different element sets")]
    ElementMismatch,
    #[error("relation contains a cycle")]
    CyclicRelation,
    #[error("unknown feature '{0}'")]
    UnknownFeature(String),
    #[error("malformed preorder: {0}")]
    Malformed(String),
}
