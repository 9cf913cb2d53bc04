//! Boolean networks compiled into Lipschitz ODE flows.
//!
//! The pipeline is: a [`NetworkSpec`] (formulas or truth tables) lowers to a
//! [`BooleanFunction`]; a [`ContinuousConversion`] turns each coordinate into
//! a continuous `Q_i = P_i ∘ L`; a [`FlowSpec`] builds the `D1` or `D2`
//! right-hand side; [`integrate`] simulates it with zero-crossing events; and
//! the [`trace`] module reads the Boolean trace back off the trajectory and
//! judges it against the network. The [`harness`] module drives all of this
//! over the worked examples and the time-scale separation sweep.

pub mod boolean;
pub mod conversion;
pub mod flow;
pub mod formula;
pub mod harness;
pub mod integrator;
pub mod trace;

pub use boolean::{hamming, ring_negation_family, strictly_between, BooleanError, BooleanFunction, BooleanState};
pub use conversion::{ramp, ContinuousConversion, ConversionError, RealPolynomial, Scheme};
pub use flow::{equilibria_1d, g, state_box, FlowError, FlowKind, FlowSpec};
pub use formula::{parse_formula, to_anf, AnfPolynomial, FormulaAst, NetworkSpec};
pub use harness::HarnessError;
pub use integrator::{integrate, IntegrationError, IntegrationOptions, Method, Trajectory};
pub use trace::{judge, ConsistencyLevel, ConsistencyVerdict, SwitchingSequence, VerdictReport};
