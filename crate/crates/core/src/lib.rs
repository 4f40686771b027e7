//! Sample quantiles under uniform (phi) mixing.
//!
//! * [`processes`]: stationary generators with exact marginals and known
//!   mixing coefficients;
//! * [`empirical`]: empirical CDFs, sample quantiles, generalized inverses;
//! * [`bahadur`]: remainder of the Bahadur representation, windowed
//!   oscillation suprema and almost-sure envelopes;
//! * [`bounds`]: exponential tail inequality for bounded mixing sums;
//! * [`harness`]: Monte-Carlo experiments, rate fits, VaR and reports.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bahadur;
pub mod bounds;
pub mod empirical;
pub mod error;
pub mod harness;
pub mod processes;
pub mod rng;

pub use bahadur::{BahadurConstants, BahadurDiagnostics, EnvelopeKind, WindowKind, WindowSpec};
pub use empirical::{EmpiricalCdf, QuantileEstimate, StepCdf};
pub use error::{Error, Result};
pub use processes::{Marginal, MixingProfile, ProcessConfig, ProcessSpec, SamplePath};
