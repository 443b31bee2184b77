// Copyright 2026 the nonrecip authors
// SPDX-License-Identifier: Apache-2.0

//! Crate-wide error type.
//!
//! Errors split into two families: *model/argument* errors (the caller gave
//! us something malformed — wrong dimensions, broken Hermiticity, parameters
//! outside a formula's domain) and *numerical* errors (the computation itself
//! failed — singular resolvent, non-unique steady state, integration drift).
//! [`Error::is_numerical`] reports the family, which the CLI maps onto its
//! exit codes.

use thiserror::Error;

/// Everything that can go wrong when building models or running them.
#[derive(Debug, Error)]
pub enum Error {
    /// A mode-network or Lindblad model violates a structural invariant.
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// A function argument is outside its documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A drive scheme was evaluated away from its required resonance.
    #[error("resonance condition not met: {0}")]
    ResonanceViolation(String),

    /// A directional-coupling builder received operators that cross the
    /// subsystem split.
    #[error("invalid coupling: {0}")]
    InvalidCoupling(String),

    /// No real (flux, damping) pair realizes directionality at this frequency.
    #[error("no directional tuning exists: {0}")]
    NoDirectionalSolution(String),

    /// A linear solve hit a (near-)singular matrix.
    #[error("numerically singular matrix (condition number ~{condition:.3e}): {context}")]
    NumericalSingularity { condition: f64, context: String },

    /// A requested integration step violates the stability guard.
    #[error("time step too large: {0}")]
    StepSize(String),

    /// Time integration lost the trace/norm beyond tolerance.
    #[error("integration failure: {0}")]
    IntegrationFailure(String),

    /// The Liouvillian null space is not one-dimensional.
    #[error("steady state is not unique (second singular value {sigma2:.3e})")]
    NonUniqueSteadyState { sigma2: f64 },

    /// Steady-state population piled up at the Fock truncation edge.
    #[error("Fock cutoff too small: mode {mode} holds {population:.3e} at the truncation edge")]
    CutoffTooSmall { mode: usize, population: f64 },

    /// An iterative solver ran out of iterations before reaching tolerance.
    #[error("solver did not converge: {0}")]
    NotConverged(String),

    /// Reading or writing a model/report failed.
    #[error("serialization: {0}")]
    Serialization(String),
}

impl Error {
    /// True for failures of the computation itself (as opposed to malformed
    /// input). The CLI exits with a distinct status for these.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NumericalSingularity { .. }
                | Error::StepSize(_)
                | Error::IntegrationFailure(_)
                | Error::NonUniqueSteadyState { .. }
                | Error::CutoffTooSmall { .. }
                | Error::NotConverged(_)
        )
    }
}
