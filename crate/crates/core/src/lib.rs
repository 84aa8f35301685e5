//! Uncertainty modeling for software architectures that contain ML components.
//!
//! An [`arch::AnnotatedArchitecture`] describes components, data flow, and the
//! epistemic / stochastic uncertainty sources attached to ML components. It
//! compiles into a discrete [`bn::BayesianNetwork`], which is queried by exact
//! inference ([`bn::infer`]) and explored with sensitivity sweeps
//! ([`analysis`]). [`patterns`] holds architecture transforms such as
//! n-version programming with a monitor and a weighted voter.

pub mod analysis;
pub mod arch;
pub mod bn;
pub mod calibration;
pub mod cli;
mod error;
mod graph;
pub mod io;
pub mod patterns;

pub use error::{Error, EvidenceDisplay, Result};

/// Renders a float as the shortest decimal string that parses back to the same value.
pub fn fmt_prob(value: f64) -> String {
    format!("{value}")
}
