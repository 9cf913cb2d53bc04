//! Numerical reproduction of the worked examples, the time-scale separation
//! theorem and the chaos diagnostics.

mod constants;
mod examples;
mod lyapunov;
mod region;
mod theorem;

use thiserror::Error;

use crate::boolean::BooleanError;
use crate::conversion::ConversionError;
use crate::flow::FlowError;
use crate::integrator::IntegrationError;

pub use constants::{admissible_delta, check_delta, estimate_constants, mu_bound, speed_floor_violation, TheoremConstants};
pub use examples::{
    copy_negation_study, fixed_point_study, product_study, run_example_suite, run_example_suite_seeded, Claim, CopyNegationStudy,
    ExampleReport, FixedPointStudy, ProductStudy, StudyTraces, QUARTIC_ROOTS,
};
pub use lyapunov::{lyapunov_max, lyapunov_with, LyapunovEstimate, LyapunovOptions};
pub use region::{build_region, RegionSpec};
pub use theorem::{verify_theorem, verify_theorem_with, MuCell, SampleOutcome, StatePlan, SweepConfig, SweepResult};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("no point of U^{state} found after {attempts} draws; delta may be too large")]
    EmptyRegion { state: String, attempts: usize },
    #[error("alpha = {alpha} outside (0, min(delta, 2/15)) for delta = {delta}")]
    BadAlpha { alpha: f64, delta: f64 },
    #[error("delta = {delta} leaves Q_{coord} = {q} on the wrong side at state {state}")]
    DeltaInadmissible { delta: f64, state: String, coord: usize, q: f64 },
    #[error("no admissible alpha for delta = {0}")]
    NoAdmissibleAlpha(f64),
    #[error("speed floor beta = {0} is not positive")]
    NonPositiveBeta(f64),
    #[error("{context}: {source}")]
    Integration {
        context: String,
        #[source]
        source: IntegrationError,
    },
    #[error("lyapunov estimate failed: {0}")]
    Lyapunov(String),
    #[error("{0}")]
    BadInput(String),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Conversion(#[from] ConversionError),
    #[error(transparent)]
    Boolean(#[from] BooleanError),
}
