//! Clauser-Horne inequality tests for states of a four-mode radiation field.
//!
//! Two engines compute the same coincidence rates:
//!
//! * a truncated Fock-space engine ([`fock`], [`linear_optics`]) for
//!   arbitrary pure or mixed states, and
//! * a covariance-matrix engine ([`gaussian`]) for centered Gaussian states.
//!
//! [`detection`] turns either engine's vacuum probabilities into coincidence
//! rates and the Clauser-Horne functional; [`coherent`] holds the closed-form
//! rates of coherent states and their positive mixtures.

pub mod coherent;
pub mod detection;
pub mod error;
pub mod fock;
pub mod gaussian;
pub mod linear_optics;
pub mod optimize;
pub mod policy;
pub mod sweep;

pub use error::{Error, Result};
pub use policy::NumericalPolicy;
