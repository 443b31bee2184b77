// Copyright 2026 the nonrecip authors
// SPDX-License-Identifier: Apache-2.0

//! Non-reciprocal interactions in bosonic mode networks.
//!
//! This crate models how directional (one-way) couplings between bosonic
//! modes arise from the interplay of synthetic gauge fields and dissipation:
//!
//! * [`lattice`] — tight-binding mode networks with complex hoppings, gauge
//!   transformations, and loop fluxes;
//! * [`drives`] — time-dependent drive schemes (coupling and frequency
//!   modulation) that generate hopping phases, with full time-domain
//!   validation of the rotating-wave approximation;
//! * [`scattering`] — input–output scattering of a dissipative three-site
//!   ring, directionality tuning, and the interfering-path decomposition of
//!   its Green's function;
//! * [`fock`] — truncated Fock spaces and dense bosonic operator algebra;
//! * [`lindblad`] — Lindblad master equations, steady states, adiabatic
//!   elimination of a lossy port mode, and the family of non-reciprocal
//!   generators built from a coherent coupling plus a correlated dissipator;
//! * [`feedforward`] — continuous measurement plus feedforward as an
//!   autonomous realization of the same directional generators;
//! * [`entanglement`] — partial-transpose negativity diagnostics separating
//!   genuinely quantum directional interactions from measurement-equivalent
//!   (LOCC) ones.

extern crate blas_src;

pub mod drives;
pub mod entanglement;
pub mod error;
pub mod feedforward;
pub mod fock;
pub mod lattice;
pub mod linalg;
pub mod lindblad;
pub mod scattering;

pub use error::Error;

/// Convenience alias: all matrices in this crate are dense complex doubles.
pub type C64 = num_complex::Complex<f64>;

/// Result alias using the crate-wide error type.
pub type Result<T> = std::result::Result<T, Error>;
