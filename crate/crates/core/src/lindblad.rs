// Copyright 2026 the nonrecip authors
// SPDX-License-Identifier: Apache-2.0

//! Directional Lindblad master equations on truncated Fock spaces.
//!
//! This module owns the open-system layer of the crate: density matrices,
//! Lindblad models (Hermitian Hamiltonian plus a weighted jump list), dense
//! Liouvillian superoperators, an RK4 integrator and an exact
//! matrix-exponential propagator, dense steady-state solves, and the model
//! builders for directional interactions:
//!
//! * [`ring_master_equation`] — two coupled modes whose shared loss channel
//!   carries the loop flux: H = −t(a₂†a₁ + a₁†a₂) with jump a₂ + e^{iΦ}a₁.
//!   At κ̃/2 = t and Φ = +π/2 the mean-value coupling of ⟨a₁⟩ into the ⟨a₂⟩
//!   equation vanishes exactly, so mode 2 drives mode 1 with no back-action.
//! * [`adiabatic_eliminate`] — integrate out a fast lossy third mode of a
//!   flux-threaded three-mode ring, yielding the two-mode model above plus
//!   the effective hoppings t̃₁₂, t̃₂₁ seen by each direction.
//! * [`build_nonreciprocal`] — the general recipe: a coherent coupling
//!   (λ/2)(O₁O₂ + h.c.) balanced against a correlated jump so that one
//!   subsystem drives the other with no back-action. Three jump layouts are
//!   supported ([`NonreciprocalVariant`]); the fully directional ones make
//!   the driven subsystem see a doubled coupling 2λ while the driving
//!   subsystem sees none.
//!
//! [`mean_value_eom_check`] verifies, for any subsystem-local probe A, that
//! tr(A·ℒρ) splits into a purely local dissipator plus a commutator with the
//! λ̃-weighted interaction — which is the precise sense in which the two
//! subsystems "see" different coupling strengths λ̃₁₂ ≠ λ̃₂₁.
//!
//! Everything here is dense and deliberately toy-scale: the Liouvillian is
//! materialized as a dim²×dim² matrix (column-stacking convention) so steady
//! states come from an honest null-space solve with an explicit uniqueness
//! check, rather than an iterative scheme that can silently converge to the
//! wrong fixed point.

use std::io::Write as IoWrite;

use ndarray::linalg::kron;
use ndarray::{Array1, Array2};

use crate::fock::{
    mode_annihilation, partial_trace_keep_system1, partial_trace_keep_system2, Bipartition,
    FockOperator, FockSpace,
};
use crate::linalg::{dagger, eigvalsh, expm, norm_2, norm_max, svd, unvec_col, vec_col};
use crate::{Error, Result, C64};

/// Hermiticity gate for model Hamiltonians (absolute, max-entry norm).
pub const HAMILTONIAN_TOL: f64 = 1e-12;

/// Trace gate for density matrices: |tr ρ − 1| must stay below this.
pub const TRACE_TOL: f64 = 1e-10;

/// Hermiticity gate for density matrices (max-entry norm of ρ − ρ†).
pub const DM_HERMITICITY_TOL: f64 = 1e-10;

/// Diagnostic positivity floor: eigenvalues of ρ may not dip below this.
pub const EIGENVALUE_FLOOR: f64 = -1e-8;

/// RK4 stability guard: dt·(‖H‖ + Σ_k Γ_k‖L_k‖²) must stay below this.
pub const STABILITY_LIMIT: f64 = 0.1;

/// [`evolve`] aborts once |tr ρ − 1| drifts beyond this.
pub const TRACE_DRIFT_LIMIT: f64 = 1e-8;

/// Uniqueness gate for [`steady_state`]: the second-smallest singular value
/// of the Liouvillian must exceed this.
pub const STEADY_STATE_GAP: f64 = 1e-8;

/// Residual gate for [`steady_state`]: ‖ℒ vec(ρ_ss)‖₂ must stay below this.
pub const STEADY_STATE_RESIDUAL: f64 = 1e-10;

/// Largest space dimension for which the dense dim²×dim² superoperator is
/// materialized (64² = 4096 columns).
pub const MAX_SUPEROP_DIM: usize = 64;

/// [`evolve`] keeps at most this many snapshots (plus the final state).
pub const MAX_SAMPLES: usize = 512;

/// Hard cap on integrator steps.
pub const MAX_STEPS: usize = 20_000_000;

/// Below this ratio of κ₃ to the largest retained scale, adiabatic
/// elimination is flagged as unreliable.
pub const ADIABATIC_HARD_RATIO: f64 = 10.0;

/// Below this ratio the elimination still carries a (milder) warning.
pub const ADIABATIC_SOFT_RATIO: f64 = 100.0;

fn czero() -> C64 {
    C64::new(0.0, 0.0)
}

fn trace(m: &Array2<C64>) -> C64 {
    m.diag().iter().fold(czero(), |acc, z| acc + z)
}

/// Multiply a matrix by −i in place semantics (returns a new array).
fn times_minus_i(m: &Array2<C64>) -> Array2<C64> {
    m.mapv(|z| C64::new(z.im, -z.re))
}

// ---------------------------------------------------------------------------
// Density matrices
// ---------------------------------------------------------------------------

/// A validated density matrix over a [`FockSpace`].
///
/// Construction enforces unit trace (within [`TRACE_TOL`]), Hermiticity
/// (within [`DM_HERMITICITY_TOL`]) and an eigenvalue floor of
/// [`EIGENVALUE_FLOOR`]. The floor is diagnostic: nothing in this module ever
/// projects a state back onto the positive cone, so a state drifting
/// negative fails loudly instead of being silently repaired.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    space: FockSpace,
    matrix: Array2<C64>,
}

impl DensityMatrix {
    /// Validate and wrap a raw matrix.
    pub fn new(space: &FockSpace, matrix: Array2<C64>) -> Result<Self> {
        let d = space.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::InvalidArgument(format!(
                "density matrix is {}x{} but the space has dimension {d}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let tr = trace(&matrix);
        if (tr - C64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::InvalidArgument(format!(
                "density matrix trace is {tr} (must be 1 within {TRACE_TOL:.0e})"
            )));
        }
        let defect = norm_max(&(&matrix - &dagger(&matrix.view())).view());
        if defect > DM_HERMITICITY_TOL {
            return Err(Error::InvalidArgument(format!(
                "density matrix is not Hermitian (defect {defect:.3e})"
            )));
        }
        // Eigenvalue floor on the Hermitized matrix.
        let herm = symmetrize(&matrix);
        let eigs = eigvalsh(&herm)?;
        if let Some(&min) = eigs
            .iter()
            .min_by(|a, b| a.partial_cmp(b).expect("real eigenvalues"))
        {
            if min < EIGENVALUE_FLOOR {
                return Err(Error::InvalidArgument(format!(
                    "density matrix has eigenvalue {min:.3e} below the floor {EIGENVALUE_FLOOR:.0e}"
                )));
            }
        }
        Ok(DensityMatrix {
            space: space.clone(),
            matrix,
        })
    }

    /// Validate dimensions, trace and Hermiticity but skip the positivity
    /// floor. Conditional (measurement-filtered) states produced by
    /// Euler–Maruyama steps are positive only to O(dt), so the stochastic
    /// layer admits transient floor violations that the deterministic
    /// integrators must keep rejecting.
    pub(crate) fn new_conditional(space: &FockSpace, matrix: Array2<C64>) -> Result<Self> {
        let d = space.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::InvalidArgument(format!(
                "density matrix is {}x{} but the space has dimension {d}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let tr = trace(&matrix);
        if (tr - C64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::InvalidArgument(format!(
                "density matrix trace is {tr} (must be 1 within {TRACE_TOL:.0e})"
            )));
        }
        let defect = norm_max(&(&matrix - &dagger(&matrix.view())).view());
        if defect > DM_HERMITICITY_TOL {
            return Err(Error::InvalidArgument(format!(
                "density matrix is not Hermitian (defect {defect:.3e})"
            )));
        }
        Ok(DensityMatrix {
            space: space.clone(),
            matrix,
        })
    }

    /// |ψ⟩⟨ψ| for a normalized pure state (norm within 1e−8 of 1).
    pub fn from_pure(space: &FockSpace, psi: &Array1<C64>) -> Result<Self> {
        if psi.len() != space.dim() {
            return Err(Error::InvalidArgument(format!(
                "state vector has length {} but the space has dimension {}",
                psi.len(),
                space.dim()
            )));
        }
        let norm_sq: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if (norm_sq.sqrt() - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidArgument(format!(
                "state vector norm is {:.12} (must be 1 within 1e-8)",
                norm_sq.sqrt()
            )));
        }
        let d = space.dim();
        let mut m = Array2::from_elem((d, d), czero());
        for i in 0..d {
            for j in 0..d {
                m[[i, j]] = psi[i] * psi[j].conj() / norm_sq;
            }
        }
        DensityMatrix::new(space, m)
    }

    /// The vacuum state |0…0⟩⟨0…0|.
    pub fn vacuum(space: &FockSpace) -> Self {
        let d = space.dim();
        let mut m = Array2::from_elem((d, d), czero());
        m[[0, 0]] = C64::new(1.0, 0.0);
        DensityMatrix {
            space: space.clone(),
            matrix: m,
        }
    }

    /// The Fock (number) state |n₁ n₂ …⟩⟨n₁ n₂ …|.
    pub fn fock_state(space: &FockSpace, occupations: &[usize]) -> Result<Self> {
        let psi = space.basis_state(occupations)?;
        DensityMatrix::from_pure(space, &psi)
    }

    /// The space this state lives on.
    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    /// The raw matrix.
    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    /// Consume into the raw matrix.
    pub fn into_matrix(self) -> Array2<C64> {
        self.matrix
    }

    /// ⟨op⟩ = tr(op·ρ).
    pub fn expectation(&self, op: &FockOperator) -> Result<C64> {
        if op.space() != &self.space {
            return Err(Error::InvalidArgument(
                "operator and state live on different spaces".into(),
            ));
        }
        Ok(op.expectation(&self.matrix))
    }

    /// Trace distance ½‖ρ − σ‖₁ (sum of absolute eigenvalues of ρ − σ).
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        if self.space != other.space {
            return Err(Error::InvalidArgument(
                "trace distance needs states on the same space".into(),
            ));
        }
        let diff = symmetrize(&(&self.matrix - &other.matrix));
        let eigs = eigvalsh(&diff)?;
        Ok(0.5 * eigs.iter().map(|e| e.abs()).sum::<f64>())
    }

    /// Reduced state of subsystem 1 (trace out subsystem 2).
    pub fn reduced_system1(&self, part: &Bipartition) -> Result<DensityMatrix> {
        let red = partial_trace_keep_system1(&self.space, part, &self.matrix)?;
        let cutoffs: Vec<usize> = part
            .system1
            .iter()
            .map(|&m| self.space.cutoff(m))
            .collect::<Result<_>>()?;
        DensityMatrix::new(&FockSpace::new(&cutoffs)?, red)
    }

    /// Reduced state of subsystem 2 (trace out subsystem 1).
    pub fn reduced_system2(&self, part: &Bipartition) -> Result<DensityMatrix> {
        let red = partial_trace_keep_system2(&self.space, part, &self.matrix)?;
        let cutoffs: Vec<usize> = part
            .system2
            .iter()
            .map(|&m| self.space.cutoff(m))
            .collect::<Result<_>>()?;
        DensityMatrix::new(&FockSpace::new(&cutoffs)?, red)
    }
}

fn symmetrize(m: &Array2<C64>) -> Array2<C64> {
    let md = dagger(&m.view());
    (m + &md).mapv(|z| z * 0.5)
}

// ---------------------------------------------------------------------------
// Lindblad models
// ---------------------------------------------------------------------------

/// A Lindblad generator: ρ̇ = −i[H, ρ] + Σ_k Γ_k 𝒟[L_k]ρ.
///
/// The Hamiltonian must be Hermitian within [`HAMILTONIAN_TOL`] and every
/// rate non-negative. Models are immutable; all evolution routines are
/// deterministic and re-entrant, so parallel parameter sweeps are safe.
#[derive(Debug, Clone)]
pub struct LindbladModel {
    space: FockSpace,
    hamiltonian: FockOperator,
    jumps: Vec<(f64, FockOperator)>,
}

impl LindbladModel {
    /// Validate and assemble a model from a Hamiltonian and a jump list.
    pub fn new(hamiltonian: FockOperator, jumps: Vec<(f64, FockOperator)>) -> Result<Self> {
        let defect = hamiltonian.hermiticity_defect();
        if defect > HAMILTONIAN_TOL {
            return Err(Error::InvalidModel(format!(
                "Hamiltonian is not Hermitian (defect {defect:.3e})"
            )));
        }
        let space = hamiltonian.space().clone();
        for (k, (rate, op)) in jumps.iter().enumerate() {
            if !rate.is_finite() || *rate < 0.0 {
                return Err(Error::InvalidModel(format!(
                    "jump {k} has rate {rate}, which is not a finite non-negative number"
                )));
            }
            if op.space() != &space {
                return Err(Error::InvalidModel(format!(
                    "jump {k} lives on a different space than the Hamiltonian"
                )));
            }
        }
        Ok(LindbladModel {
            space,
            hamiltonian,
            jumps,
        })
    }

    /// The underlying space.
    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    /// The Hamiltonian.
    pub fn hamiltonian(&self) -> &FockOperator {
        &self.hamiltonian
    }

    /// The weighted jump list.
    pub fn jumps(&self) -> &[(f64, FockOperator)] {
        &self.jumps
    }

    /// A copy of this model with `extra` added to the Hamiltonian.
    pub fn with_added_hamiltonian(&self, extra: &FockOperator) -> Result<LindbladModel> {
        LindbladModel::new(self.hamiltonian.add(extra)?, self.jumps.clone())
    }

    /// A copy of this model with one more jump channel.
    pub fn with_jump(&self, rate: f64, op: FockOperator) -> Result<LindbladModel> {
        let mut jumps = self.jumps.clone();
        jumps.push((rate, op));
        LindbladModel::new(self.hamiltonian.clone(), jumps)
    }

    /// ‖H‖₂ + Σ_k Γ_k ‖L_k‖₂² — the scale entering the RK4 step guard.
    pub fn norm_bound(&self) -> Result<f64> {
        let mut bound = norm_2(self.hamiltonian.matrix())?;
        for (rate, op) in &self.jumps {
            let n = norm_2(op.matrix())?;
            bound += rate * n * n;
        }
        Ok(bound)
    }
}

/// Precomputed matrices for fast repeated application of a Liouvillian.
struct Applier {
    h: Array2<C64>,
    // (Γ, L, L†, L†L) per jump.
    jumps: Vec<(f64, Array2<C64>, Array2<C64>, Array2<C64>)>,
}

impl Applier {
    fn new(model: &LindbladModel) -> Self {
        let h = model.hamiltonian.matrix().clone();
        let jumps = model
            .jumps
            .iter()
            .map(|(rate, op)| {
                let l = op.matrix().clone();
                let ld = dagger(&l.view());
                let ldl = ld.dot(&l);
                (*rate, l, ld, ldl)
            })
            .collect();
        Applier { h, jumps }
    }

    /// ℒρ = −i[H, ρ] + Σ Γ (LρL† − ½{L†L, ρ}).
    fn apply(&self, rho: &Array2<C64>) -> Array2<C64> {
        let comm = self.h.dot(rho) - rho.dot(&self.h);
        let mut out = times_minus_i(&comm);
        for (rate, l, ld, ldl) in &self.jumps {
            if *rate == 0.0 {
                continue;
            }
            let sandwich = l.dot(rho).dot(ld);
            let anti = ldl.dot(rho) + rho.dot(ldl);
            out = out + (sandwich - anti.mapv(|z| z * 0.5)).mapv(|z| z * rate);
        }
        out
    }
}

/// The dissipative superoperator applied to a state:
/// 𝒟[L]ρ = LρL† − ½{L†L, ρ}. Always traceless.
pub fn dissipator(l: &FockOperator, rho: &DensityMatrix) -> Result<Array2<C64>> {
    if l.space() != rho.space() {
        return Err(Error::InvalidArgument(
            "jump operator and state live on different spaces".into(),
        ));
    }
    Ok(dissipator_matrix(l.matrix(), rho.matrix()))
}

pub(crate) fn dissipator_matrix(l: &Array2<C64>, rho: &Array2<C64>) -> Array2<C64> {
    let ld = dagger(&l.view());
    let ldl = ld.dot(l);
    let sandwich = l.dot(rho).dot(&ld);
    let anti = ldl.dot(rho) + rho.dot(&ldl);
    sandwich - anti.mapv(|z| z * 0.5)
}

/// Apply the full generator to an arbitrary matrix (not necessarily a state;
/// linearity in ρ makes this the natural probe for mean-value coefficients).
pub fn apply_liouvillian(model: &LindbladModel, rho: &Array2<C64>) -> Array2<C64> {
    Applier::new(model).apply(rho)
}

/// The dense dim²×dim² Liouvillian matrix in the column-stacking convention
/// (vec(AρB) = (Bᵀ ⊗ A)·vec(ρ)).
pub fn superoperator_matrix(model: &LindbladModel) -> Result<Array2<C64>> {
    let d = model.space.dim();
    if d > MAX_SUPEROP_DIM {
        return Err(Error::InvalidArgument(format!(
            "space dimension {d} exceeds the dense-superoperator cap {MAX_SUPEROP_DIM}"
        )));
    }
    let eye: Array2<C64> = Array2::eye(d);
    let h = model.hamiltonian.matrix();
    let ht = h.t().to_owned();
    // −i(I⊗H − Hᵀ⊗I)
    let mut sup = times_minus_i(&(kron(&eye, h) - kron(&ht, &eye)));
    for (rate, op) in &model.jumps {
        if *rate == 0.0 {
            continue;
        }
        let l = op.matrix();
        let lconj = l.mapv(|z| z.conj());
        let ld = dagger(&l.view());
        let ldl = ld.dot(l);
        let ldl_t = ldl.t().to_owned();
        let term = kron(&lconj, l) - (kron(&eye, &ldl) + kron(&ldl_t, &eye)).mapv(|z| z * 0.5);
        sup = sup + term.mapv(|z| z * rate);
    }
    Ok(sup)
}

/// H − (i/2)·Σ_k Γ_k L_k†L_k — the non-Hermitian Hamiltonian governing
/// evolution between quantum jumps.
pub fn nonhermitian_part(model: &LindbladModel) -> Result<FockOperator> {
    let mut out = model.hamiltonian.clone();
    for (rate, op) in &model.jumps {
        let ldl = op.adjoint().mul(op)?;
        out = out.add(&ldl.scale(C64::new(0.0, -rate / 2.0)))?;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Time evolution
// ---------------------------------------------------------------------------

/// A sampled master-equation trajectory: matched lists of times and states.
#[derive(Debug, Clone)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<DensityMatrix>,
}

impl Trajectory {
    /// Sample times (strictly increasing, starting at 0).
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Sampled states, aligned with [`Trajectory::times`].
    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    /// Number of samples.
    pub fn len(&self) -> usize {
        self.times.len()
    }

    /// True when no samples were recorded (never the case for [`evolve`]).
    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// The last sampled state.
    pub fn final_state(&self) -> &DensityMatrix {
        self.states.last().expect("trajectory is never empty")
    }

    /// ⟨op⟩ at every sample.
    pub fn expectations(&self, op: &FockOperator) -> Result<Vec<C64>> {
        self.states.iter().map(|s| s.expectation(op)).collect()
    }

    /// Write sampled expectation values as CSV: a `time` column followed by
    /// `<name>_re`, `<name>_im` pairs for each labeled operator.
    pub fn write_expectations_csv<W: IoWrite>(
        &self,
        columns: &[(&str, &FockOperator)],
        out: &mut W,
    ) -> Result<()> {
        let io_err = |e: std::io::Error| Error::Serialization(format!("writing CSV: {e}"));
        let mut header = String::from("time");
        for (name, _) in columns {
            header.push_str(&format!(",{name}_re,{name}_im"));
        }
        writeln!(out, "{header}").map_err(io_err)?;
        let series: Vec<Vec<C64>> = columns
            .iter()
            .map(|(_, op)| self.expectations(op))
            .collect::<Result<_>>()?;
        for (k, t) in self.times.iter().enumerate() {
            let mut line = format!("{t:.16e}");
            for vals in &series {
                line.push_str(&format!(",{:.16e},{:.16e}", vals[k].re, vals[k].im));
            }
            writeln!(out, "{line}").map_err(io_err)?;
        }
        Ok(())
    }
}

/// Integrate ρ̇ = ℒρ with a classical 4th-order step.
///
/// The state is re-Hermitized by symmetrization after every step (the
/// generator preserves Hermiticity exactly; symmetrization only removes
/// rounding skew) and the trace is monitored: drift beyond
/// [`TRACE_DRIFT_LIMIT`] aborts with an integration-failure error. At most
/// [`MAX_SAMPLES`] evenly strided snapshots are kept, always including t = 0
/// and t = t_final.
pub fn evolve(
    model: &LindbladModel,
    rho0: &DensityMatrix,
    t_final: f64,
    dt: f64,
) -> Result<Trajectory> {
    if rho0.space() != &model.space {
        return Err(Error::InvalidArgument(
            "initial state lives on a different space than the model".into(),
        ));
    }
    if !t_final.is_finite() || t_final <= 0.0 || !dt.is_finite() || dt <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "t_final and dt must be positive and finite, got t_final={t_final}, dt={dt}"
        )));
    }
    let bound = model.norm_bound()?;
    if dt * bound >= STABILITY_LIMIT {
        return Err(Error::StepSize(format!(
            "dt·(‖H‖ + ΣΓ‖L‖²) = {:.3e} exceeds the stability guard {STABILITY_LIMIT}; \
             reduce dt below {:.3e}",
            dt * bound,
            STABILITY_LIMIT / bound.max(f64::MIN_POSITIVE)
        )));
    }
    let n_steps = (t_final / dt).ceil() as usize;
    let n_steps = n_steps.max(1);
    if n_steps > MAX_STEPS {
        return Err(Error::InvalidArgument(format!(
            "t_final/dt = {n_steps} steps exceeds the cap {MAX_STEPS}"
        )));
    }
    let stride = (n_steps + MAX_SAMPLES - 2) / (MAX_SAMPLES - 1);
    let stride = stride.max(1);

    let applier = Applier::new(model);
    let mut rho = rho0.matrix().clone();
    let mut times = Vec::with_capacity(MAX_SAMPLES);
    let mut states = Vec::with_capacity(MAX_SAMPLES);
    times.push(0.0);
    states.push(rho0.clone());

    let sample = |t: f64, m: &Array2<C64>| -> Result<DensityMatrix> {
        DensityMatrix::new(&model.space, m.clone()).map_err(|e| {
            Error::IntegrationFailure(format!("state invalid at t = {t:.6}: {e}"))
        })
    };

    for k in 1..=n_steps {
        // Clip the last step so the trajectory lands exactly on t_final.
        let t_prev = (k - 1) as f64 * dt;
        let h = if k == n_steps { t_final - t_prev } else { dt };
        let t_now = if k == n_steps { t_final } else { k as f64 * dt };

        let k1 = applier.apply(&rho);
        let k2 = applier.apply(&(&rho + &k1.mapv(|z| z * (h / 2.0))));
        let k3 = applier.apply(&(&rho + &k2.mapv(|z| z * (h / 2.0))));
        let k4 = applier.apply(&(&rho + &k3.mapv(|z| z * h)));
        let incr = k1 + k2.mapv(|z| z * 2.0) + k3.mapv(|z| z * 2.0) + k4;
        rho = &rho + &incr.mapv(|z| z * (h / 6.0));
        rho = symmetrize(&rho);

        let drift = (trace(&rho) - C64::new(1.0, 0.0)).norm();
        if drift > TRACE_DRIFT_LIMIT {
            return Err(Error::IntegrationFailure(format!(
                "trace drifted by {drift:.3e} at t = {t_now:.6} (limit {TRACE_DRIFT_LIMIT:.0e})"
            )));
        }

        if k == n_steps || k % stride == 0 {
            times.push(t_now);
            states.push(sample(t_now, &rho)?);
        }
    }
    Ok(Trajectory { times, states })
}

/// Exact propagation ρ(t) = exp(ℒt)ρ₀ via the dense superoperator.
///
/// Free of time-stepping error; preferred for strict invariance checks.
/// Subject to the [`MAX_SUPEROP_DIM`] cap.
pub fn propagate(model: &LindbladModel, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    if rho0.space() != &model.space {
        return Err(Error::InvalidArgument(
            "initial state lives on a different space than the model".into(),
        ));
    }
    if !t.is_finite() || t < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "propagation time must be non-negative and finite, got {t}"
        )));
    }
    let sup = superoperator_matrix(model)?;
    let prop = expm(&sup.mapv(|z| z * t).view())?;
    let v = prop.dot(&vec_col(&rho0.matrix().view()));
    let rho = symmetrize(&unvec_col(&v, model.space.dim()));
    DensityMatrix::new(&model.space, rho)
}

/// The unique steady state of the generator, from a dense null-space solve.
///
/// The Liouvillian's full SVD provides both the null vector and an explicit
/// uniqueness certificate: the second-smallest singular value must exceed
/// [`STEADY_STATE_GAP`], otherwise the null space is (numerically)
/// degenerate and the problem is rejected rather than silently resolved.
pub fn steady_state(model: &LindbladModel) -> Result<DensityMatrix> {
    let d = model.space.dim();
    let sup = superoperator_matrix(model)?;
    let (_u, s, vt) = svd(&sup)?;
    let n = s.len();
    let sigma2 = s[n - 2];
    if sigma2 <= STEADY_STATE_GAP {
        return Err(Error::NonUniqueSteadyState { sigma2 });
    }
    // Right-singular vector of the smallest singular value spans the null
    // space: V's last column, i.e. the conjugate of V†'s last row.
    let null: Array1<C64> = vt.row(n - 1).mapv(|z| z.conj());
    let raw = unvec_col(&null, d);
    let tr = trace(&raw);
    if tr.norm() < 1e-6 {
        return Err(Error::NotConverged(format!(
            "null vector is nearly traceless (|tr| = {:.3e}); cannot normalize a steady state",
            tr.norm()
        )));
    }
    let rho = symmetrize(&raw.mapv(|z| z / tr));
    // Renormalize the now-real trace exactly.
    let tr2 = trace(&rho).re;
    let rho = rho.mapv(|z| z / tr2);
    let residual = {
        let v = sup.dot(&vec_col(&rho.view()));
        v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    };
    if residual > STEADY_STATE_RESIDUAL {
        return Err(Error::NotConverged(format!(
            "steady-state residual ‖ℒρ‖ = {residual:.3e} exceeds {STEADY_STATE_RESIDUAL:.0e}"
        )));
    }
    DensityMatrix::new(&model.space, rho)
}

/// Krylov-space cap per GMRES cycle of [`steady_state_large`].
const GMRES_MAX_KRYLOV: usize = 400;

/// Restart cycles allowed before the iteration is declared stalled.
const GMRES_MAX_CYCLES: usize = 3;

/// Relative residual target of the inner GMRES solve. The returned state is
/// still gated on the absolute certificate [`STEADY_STATE_RESIDUAL`].
const GMRES_RELATIVE_TOL: f64 = 1e-12;

/// Steady state for dimensions beyond the dense-superoperator cap.
///
/// Solves the *bordered* linear system Ã(ρ) = 𝟙/d with
/// Ã(ρ) = 𝒫(ℒρ) + tr(ρ)·𝟙/d by restarted full-memory GMRES. Bordering
/// removes the null direction: because ℒ is trace-annihilating, any solution
/// necessarily has tr ρ = 1 and ℒρ = 0, and when the steady state is unique
/// the bordered operator is nonsingular, so no renormalization tricks are
/// needed during the iteration. The preconditioner 𝒫 inverts the *diagonal*
/// drift: with Dᵢ = (H_eff)ᵢᵢ the entrywise division
/// (𝒫X)ᵢⱼ = Xᵢⱼ / (s + i(Dᵢ − D̄ⱼ)) resums the local decay rates, and the
/// shift s > 0 keeps every denominator away from zero (its real part is s
/// plus the two local damping rates), so no spectral decomposition of the
/// highly non-normal H_eff is ever needed.
///
/// The result carries the same residual certificate as [`steady_state`]
/// (‖ℒρ‖ < [`STEADY_STATE_RESIDUAL`]) but *no uniqueness certificate*: with
/// several steady states the bordered system is singular and GMRES either
/// stalls (reported as [`Error::NotConverged`]) or returns one valid state.
pub fn steady_state_large(model: &LindbladModel) -> Result<DensityMatrix> {
    let d = model.space.dim();
    let has_jump = model.jumps.iter().any(|(rate, _)| *rate > 0.0);
    if !has_jump {
        return Err(Error::InvalidArgument(
            "steady-state iteration needs at least one dissipative channel".into(),
        ));
    }
    let h_eff = nonhermitian_part(model)?;
    let diag: Vec<C64> = (0..d).map(|i| h_eff.matrix()[[i, i]]).collect();
    // Shift on the scale of the smallest nonzero local damping rate.
    let min_damping = diag
        .iter()
        .map(|z| -z.im)
        .filter(|y| *y > 0.0)
        .fold(f64::INFINITY, f64::min);
    let s = if min_damping.is_finite() {
        0.5 * min_damping
    } else {
        1.0
    };
    let mut denom = Array2::from_elem((d, d), czero());
    for i in 0..d {
        for j in 0..d {
            denom[[i, j]] = C64::new(s, 0.0) + C64::new(0.0, 1.0) * (diag[i] - diag[j].conj());
        }
    }
    let applier = Applier::new(model);
    // Right-hand side and bordering anchor: the maximally mixed matrix 𝟙/d.
    let anchor: Array2<C64> = Array2::eye(d).mapv(|z: C64| z / d as f64);
    let apply_bordered = |v: &Array2<C64>| -> Array2<C64> {
        let tr_v = trace(v);
        let mut out = applier.apply(v) / &denom;
        out.zip_mut_with(&anchor, |o, a| *o += tr_v * *a);
        out
    };
    let inner = |a: &Array2<C64>, b: &Array2<C64>| -> C64 {
        a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
    };
    let norm = |a: &Array2<C64>| -> f64 { a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() };

    let b_norm = norm(&anchor);
    let m_cap = GMRES_MAX_KRYLOV.min(d * d);
    let mut x = anchor.clone();
    'cycles: for _ in 0..GMRES_MAX_CYCLES {
        let r0 = &anchor - &apply_bordered(&x);
        let beta = norm(&r0);
        if !beta.is_finite() {
            return Err(Error::NotConverged(
                "steady-state iterate lost its trace".into(),
            ));
        }
        if beta <= GMRES_RELATIVE_TOL * b_norm {
            break 'cycles;
        }
        // Arnoldi with modified Gram–Schmidt (two passes) and Givens updates
        // of the Hessenberg least-squares problem.
        let mut basis: Vec<Array2<C64>> = vec![r0.mapv(|z| z / beta)];
        let mut h = Array2::from_elem((m_cap + 1, m_cap), czero());
        let mut cos: Vec<f64> = Vec::with_capacity(m_cap);
        let mut sin: Vec<C64> = Vec::with_capacity(m_cap);
        let mut g: Vec<C64> = vec![C64::new(beta, 0.0)];
        let mut k_used = 0;
        for k in 0..m_cap {
            let mut w = apply_bordered(&basis[k]);
            for _pass in 0..2 {
                for (i, v) in basis.iter().enumerate() {
                    let c = inner(v, &w);
                    h[[i, k]] += c;
                    w.zip_mut_with(v, |wz, vz| *wz -= c * *vz);
                }
            }
            let wn = norm(&w);
            h[[k + 1, k]] = C64::new(wn, 0.0);
            for i in 0..k {
                let hi = h[[i, k]];
                let hj = h[[i + 1, k]];
                h[[i, k]] = cos[i] * hi + sin[i] * hj;
                h[[i + 1, k]] = -sin[i].conj() * hi + cos[i] * hj;
            }
            let alpha = h[[k, k]];
            let (c, sgn) = givens(alpha, wn);
            h[[k, k]] = c * alpha + sgn * wn;
            h[[k + 1, k]] = czero();
            cos.push(c);
            sin.push(sgn);
            g.push(-sgn.conj() * g[k]);
            g[k] *= c;
            k_used = k + 1;
            let lucky = wn <= f64::EPSILON * h[[k, k]].norm().max(b_norm);
            if g[k + 1].norm() <= GMRES_RELATIVE_TOL * b_norm || lucky {
                break;
            }
            w.mapv_inplace(|z| z / wn);
            basis.push(w);
        }
        // Back-substitute the triangular system and expand in the basis.
        let mut y = vec![czero(); k_used];
        for i in (0..k_used).rev() {
            let mut acc = g[i];
            for j in i + 1..k_used {
                acc -= h[[i, j]] * y[j];
            }
            if h[[i, i]].norm() < f64::MIN_POSITIVE {
                return Err(Error::NotConverged(
                    "steady-state solve hit a singular projected system \
                     (the steady state may not be unique)"
                        .into(),
                ));
            }
            y[i] = acc / h[[i, i]];
        }
        for (i, yi) in y.iter().enumerate() {
            x.zip_mut_with(&basis[i], |xz, vz| *xz += *yi * *vz);
        }
        if g[k_used].norm() <= GMRES_RELATIVE_TOL * b_norm {
            break 'cycles;
        }
    }

    let rho = {
        let sym = symmetrize(&x);
        let tr = trace(&sym).re;
        if !tr.is_finite() || tr.abs() < f64::MIN_POSITIVE {
            return Err(Error::NotConverged(
                "steady-state iterate lost its trace".into(),
            ));
        }
        sym.mapv(|z| z / tr)
    };
    let residual = {
        let lrho = apply_liouvillian(model, &rho);
        lrho.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    };
    if residual > STEADY_STATE_RESIDUAL {
        return Err(Error::NotConverged(format!(
            "steady-state iteration stalled with residual ‖ℒρ‖ = {residual:.3e} \
             (limit {STEADY_STATE_RESIDUAL:.0e})"
        )));
    }
    DensityMatrix::new(&model.space, rho)
}

/// Complex Givens rotation zeroing β ≥ 0 against α: returns (c, s) with
/// c real so that [c s; −s̄ c]·(α, β) = (r, 0) and c² + |s|² = 1.
fn givens(alpha: C64, beta: f64) -> (f64, C64) {
    if beta == 0.0 {
        return (1.0, czero());
    }
    let a = alpha.norm();
    if a == 0.0 {
        return (0.0, C64::new(1.0, 0.0));
    }
    let t = (a * a + beta * beta).sqrt();
    (a / t, (alpha / a) * (beta / t))
}

// ---------------------------------------------------------------------------
// The dissipative flux ring and adiabatic elimination
// ---------------------------------------------------------------------------

/// Two modes coupled coherently and through a shared flux-carrying loss:
/// H = −t(a₂†a₁ + a₁†a₂), jump √κ̃·(a₂ + e^{iΦ}a₁).
///
/// The mean values obey d⟨a₁⟩/dt = −(κ̃/2)⟨a₁⟩ + i·t̃₁₂⟨a₂⟩ (and 1↔2 with
/// Φ → −Φ), with the effective hoppings of [`ring_couplings`]. At κ̃/2 = t,
/// Φ = +π/2 the coupling t̃₂₁ vanishes: mode 2 evolves autonomously and
/// drives mode 1 (2 → 1 directionality); Φ = −π/2 reverses the direction.
pub fn ring_master_equation(
    t: f64,
    flux: f64,
    kappa_tilde: f64,
    space: &FockSpace,
) -> Result<LindbladModel> {
    if space.num_modes() != 2 {
        return Err(Error::InvalidArgument(format!(
            "ring master equation needs a two-mode space, got {} modes",
            space.num_modes()
        )));
    }
    if !t.is_finite() || !flux.is_finite() {
        return Err(Error::InvalidArgument(
            "hopping and flux must be finite".into(),
        ));
    }
    if !kappa_tilde.is_finite() || kappa_tilde < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "κ̃ must be non-negative and finite, got {kappa_tilde}"
        )));
    }
    let a1 = mode_annihilation(space, 1)?;
    let a2 = mode_annihilation(space, 2)?;
    let hop = a2.adjoint().mul(&a1)?;
    let h = hop.add(&hop.adjoint())?.scale(C64::new(-t, 0.0));
    let jumps = if kappa_tilde > 0.0 {
        let z = a2.add(&a1.scale(C64::from_polar(1.0, flux)))?;
        vec![(kappa_tilde, z)]
    } else {
        Vec::new()
    };
    LindbladModel::new(h, jumps)
}

/// The effective directional hoppings of the ring master equation:
/// t̃₁₂ = t + i(κ̃/2)e^{−iΦ} and t̃₂₁ = t + i(κ̃/2)e^{+iΦ}.
pub fn ring_couplings(t: f64, flux: f64, kappa_tilde: f64) -> (C64, C64) {
    let half = C64::new(0.0, kappa_tilde / 2.0);
    let t12 = t + half * C64::from_polar(1.0, -flux);
    let t21 = t + half * C64::from_polar(1.0, flux);
    (t12, t21)
}

/// The three-mode flux ring *before* adiabatic elimination.
///
/// Modes 1 and 2 hop directly (amplitude t) and via mode 3 (amplitude t′),
/// every directed bond 1→2, 2→3, 3→1 carrying the phase e^{−iφ} (loop flux
/// Φ = 3φ); mode 3 is damped at κ₃ and modes 1, 2 optionally at κ₁, κ₂:
///
///   H = −(t e^{−iφ} a₂†a₁ + t′ e^{−iφ} a₃†a₂ + t′ e^{−iφ} a₁†a₃ + h.c.)
pub fn ring_with_auxiliary_mode(
    t: f64,
    t_prime: f64,
    phi: f64,
    kappa1: f64,
    kappa2: f64,
    kappa3: f64,
    space: &FockSpace,
) -> Result<LindbladModel> {
    if space.num_modes() != 3 {
        return Err(Error::InvalidArgument(format!(
            "the pre-elimination ring needs a three-mode space, got {} modes",
            space.num_modes()
        )));
    }
    for (name, v) in [("t", t), ("t'", t_prime), ("phi", phi)] {
        if !v.is_finite() {
            return Err(Error::InvalidArgument(format!("{name} must be finite")));
        }
    }
    for (name, v) in [("kappa1", kappa1), ("kappa2", kappa2), ("kappa3", kappa3)] {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "{name} must be non-negative and finite, got {v}"
            )));
        }
    }
    let a1 = mode_annihilation(space, 1)?;
    let a2 = mode_annihilation(space, 2)?;
    let a3 = mode_annihilation(space, 3)?;
    let phase = C64::from_polar(1.0, -phi);
    let bond = |to: &FockOperator, from: &FockOperator, amp: f64| -> Result<FockOperator> {
        Ok(to.adjoint().mul(from)?.scale(phase * amp))
    };
    let mut h = bond(&a2, &a1, t)?;
    h = h.add(&bond(&a3, &a2, t_prime)?)?;
    h = h.add(&bond(&a1, &a3, t_prime)?)?;
    let h = h.add(&h.adjoint())?.scale(C64::new(-1.0, 0.0));
    let mut jumps = vec![(kappa3, a3)];
    if kappa1 > 0.0 {
        jumps.push((kappa1, a1));
    }
    if kappa2 > 0.0 {
        jumps.push((kappa2, a2));
    }
    LindbladModel::new(h, jumps)
}

/// Result of adiabatically eliminating the lossy third mode of the ring.
#[derive(Debug, Clone)]
pub struct AdiabaticElimination {
    /// Induced collective damping κ̃ = 4t′²/κ₃.
    pub kappa_tilde: f64,
    /// Effective hopping seen by mode 1: t̃₁₂ = e^{iφ}t + e^{−2iφ}·2it′²/κ₃
    /// (lab gauge of the three-mode network).
    pub t12: C64,
    /// Effective hopping seen by mode 2: t̃₂₁ = e^{−iφ}t + e^{+2iφ}·2it′²/κ₃.
    pub t21: C64,
    /// The reduced two-mode model. It is expressed in the gauged frame that
    /// moves the whole loop flux Φ = 3φ onto the jump operator, so its mode-1
    /// amplitude relates to the lab frame by ⟨a₁⟩_model = e^{−iφ}⟨a₁⟩_lab
    /// (mode 2 is unchanged), and its hoppings are e^{∓iφ}·t̃₁₂/₂₁.
    pub model: LindbladModel,
    /// Set when κ₃ does not dominate the retained scales strongly enough
    /// for the elimination to be quantitatively trustworthy.
    pub warning: Option<String>,
}

/// Adiabatically eliminate the damped auxiliary mode of the three-mode ring.
///
/// Valid when κ₃ dominates every retained scale. The guard is advisory, not
/// fatal: below [`ADIABATIC_SOFT_RATIO`]× the result carries a warning,
/// below [`ADIABATIC_HARD_RATIO`]× a stronger one. The returned model is the
/// flux-in-jump [`ring_master_equation`] with Φ = 3φ and κ̃ = 4t′²/κ₃, plus
/// local decay κ₁, κ₂.
pub fn adiabatic_eliminate(
    t: f64,
    t_prime: f64,
    phi: f64,
    kappa1: f64,
    kappa2: f64,
    kappa3: f64,
    space: &FockSpace,
) -> Result<AdiabaticElimination> {
    for (name, v) in [("t", t), ("t'", t_prime), ("phi", phi)] {
        if !v.is_finite() {
            return Err(Error::InvalidArgument(format!("{name} must be finite")));
        }
    }
    for (name, v) in [("kappa1", kappa1), ("kappa2", kappa2)] {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "{name} must be non-negative and finite, got {v}"
            )));
        }
    }
    if !kappa3.is_finite() || kappa3 <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "κ₃ must be positive and finite, got {kappa3}"
        )));
    }
    let scale = t.abs().max(t_prime.abs()).max(kappa1).max(kappa2);
    let ratio = if scale > 0.0 { kappa3 / scale } else { f64::INFINITY };
    let warning = if ratio <= ADIABATIC_HARD_RATIO {
        Some(format!(
            "κ₃ is only {ratio:.1}× the largest retained scale (needs > {ADIABATIC_HARD_RATIO}×); \
             the eliminated model is unreliable here"
        ))
    } else if ratio < ADIABATIC_SOFT_RATIO {
        Some(format!(
            "κ₃ is {ratio:.1}× the largest retained scale; eliminated-model errors scale as \
             1/κ₃ and are still noticeable below {ADIABATIC_SOFT_RATIO}×"
        ))
    } else {
        None
    };

    let kappa_tilde = 4.0 * t_prime * t_prime / kappa3;
    let induced = C64::new(0.0, 2.0 * t_prime * t_prime / kappa3);
    let t12 = C64::from_polar(1.0, phi) * t + C64::from_polar(1.0, -2.0 * phi) * induced;
    let t21 = C64::from_polar(1.0, -phi) * t + C64::from_polar(1.0, 2.0 * phi) * induced;

    let mut model = ring_master_equation(t, 3.0 * phi, kappa_tilde, space)?;
    if kappa1 > 0.0 {
        model = model.with_jump(kappa1, mode_annihilation(space, 1)?)?;
    }
    if kappa2 > 0.0 {
        model = model.with_jump(kappa2, mode_annihilation(space, 2)?)?;
    }
    Ok(AdiabaticElimination {
        kappa_tilde,
        t12,
        t21,
        model,
        warning,
    })
}

// ---------------------------------------------------------------------------
// The general non-reciprocal recipe
// ---------------------------------------------------------------------------

/// The effective coupling strengths seen by each subsystem:
/// λ̃₁₂ = λ + Γe^{−iθ} (system 1) and λ̃₂₁ = λ − Γe^{−iθ} (system 2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveCouplings {
    /// Coupling seen by system 1 (how strongly system 2 back-acts on it).
    pub lambda12: C64,
    /// Coupling seen by system 2.
    pub lambda21: C64,
}

impl EffectiveCouplings {
    /// True when the two sides see couplings of different magnitude.
    pub fn is_directional(&self) -> bool {
        let scale = self.lambda12.norm().max(self.lambda21.norm());
        if scale == 0.0 {
            return false;
        }
        (self.lambda12.norm() - self.lambda21.norm()).abs() > 1e-12 * scale
    }
}

/// Effective couplings of the pretuned recipe with coherent strength λ,
/// dissipative strength Γ and jump phase θ.
pub fn effective_couplings(lambda: f64, gamma: f64, theta: f64) -> EffectiveCouplings {
    let g = C64::from_polar(gamma, -theta);
    EffectiveCouplings {
        lambda12: g + lambda,
        lambda21: -g + lambda,
    }
}

/// Which way influence flows in a fully directional model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InfluenceDirection {
    /// System 1 drives system 2; system 1 evolves as if alone (λ̃₁₂ = 0,
    /// λ̃₂₁ = 2λ). Jump sign −i (the upper sign of ∓).
    OneToTwo,
    /// System 2 drives system 1 (λ̃₁₂ = 2λ, λ̃₂₁ = 0). Jump sign +i.
    TwoToOne,
}

/// The three jump layouts of the non-reciprocal recipe. All share the
/// coherent coupling H = (λ/2)(O₁O₂ + h.c.); they differ in the correlated
/// jump that balances it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NonreciprocalVariant {
    /// Jump (Γ, O₁ + ie^{iθ}O₂†): independently tunable dissipative strength
    /// and phase. Directional only when Γe^{−iθ} = ∓λ.
    Pretuned {
        /// Dissipative coupling rate Γ ≥ 0.
        gamma: f64,
        /// Jump phase θ.
        theta: f64,
    },
    /// Jump (λ, √η·O₁ ∓ i·O₂†/√η): fully directional for every asymmetry
    /// η > 0. η only reweights the *local* dissipation (η on system 1, 1/η
    /// on system 2); the interaction part is η-independent.
    Directional {
        /// Local-dissipation asymmetry η > 0.
        eta: f64,
        /// Which subsystem drives which.
        direction: InfluenceDirection,
    },
    /// Jump (λ, √η·O₁† ∓ i·O₂/√η): the adjoint layout. Equally directional,
    /// but the local channels are 𝒟[O₁†] / 𝒟[O₂] instead of 𝒟[O₁] / 𝒟[O₂†]
    /// (for bosonic O = a this heats the driver instead of cooling it).
    Conjugated {
        /// Local-dissipation asymmetry η > 0.
        eta: f64,
        /// Which subsystem drives which.
        direction: InfluenceDirection,
    },
}

/// A Lindblad model built by [`build_nonreciprocal`], retaining the coupling
/// structure (operators, strength, variant, inferred bipartition) that the
/// mean-value decomposition of [`mean_value_eom_check`] needs.
#[derive(Debug, Clone)]
pub struct NonreciprocalModel {
    model: LindbladModel,
    part: Bipartition,
    o1: FockOperator,
    o2: FockOperator,
    lambda: f64,
    variant: NonreciprocalVariant,
}

impl NonreciprocalModel {
    /// The underlying Lindblad model.
    pub fn model(&self) -> &LindbladModel {
        &self.model
    }

    /// Consume into the underlying Lindblad model.
    pub fn into_model(self) -> LindbladModel {
        self.model
    }

    /// The subsystem split inferred from the coupling operators.
    pub fn bipartition(&self) -> &Bipartition {
        &self.part
    }

    /// The system-1 coupling operator.
    pub fn o1(&self) -> &FockOperator {
        &self.o1
    }

    /// The system-2 coupling operator.
    pub fn o2(&self) -> &FockOperator {
        &self.o2
    }

    /// The coherent coupling strength λ.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// The jump layout.
    pub fn variant(&self) -> NonreciprocalVariant {
        self.variant
    }

    /// The coupling strengths seen by each side. For the directional and
    /// conjugated layouts these are exactly (0, 2λ) or (2λ, 0); for the
    /// pretuned layout they follow [`effective_couplings`].
    pub fn effective_couplings(&self) -> EffectiveCouplings {
        match self.variant {
            NonreciprocalVariant::Pretuned { gamma, theta } => {
                effective_couplings(self.lambda, gamma, theta)
            }
            NonreciprocalVariant::Directional { direction, .. }
            | NonreciprocalVariant::Conjugated { direction, .. } => {
                let two = C64::new(2.0 * self.lambda, 0.0);
                match direction {
                    InfluenceDirection::OneToTwo => EffectiveCouplings {
                        lambda12: czero(),
                        lambda21: two,
                    },
                    InfluenceDirection::TwoToOne => EffectiveCouplings {
                        lambda12: two,
                        lambda21: czero(),
                    },
                }
            }
        }
    }

    /// The purely local dissipation channel acting on the given side:
    /// (rate, operator) such that the side's mean-value EOM contains
    /// rate·tr(A·𝒟[operator]ρ).
    fn local_channel(&self, side: Side) -> (f64, FockOperator) {
        match (self.variant, side) {
            (NonreciprocalVariant::Pretuned { gamma, .. }, Side::One) => (gamma, self.o1.clone()),
            (NonreciprocalVariant::Pretuned { gamma, .. }, Side::Two) => {
                (gamma, self.o2.adjoint())
            }
            (NonreciprocalVariant::Directional { eta, .. }, Side::One) => {
                (self.lambda * eta, self.o1.clone())
            }
            (NonreciprocalVariant::Directional { eta, .. }, Side::Two) => {
                (self.lambda / eta, self.o2.adjoint())
            }
            (NonreciprocalVariant::Conjugated { eta, .. }, Side::One) => {
                (self.lambda * eta, self.o1.adjoint())
            }
            (NonreciprocalVariant::Conjugated { eta, .. }, Side::Two) => {
                (self.lambda / eta, self.o2.clone())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    One,
    Two,
}

/// Build a non-reciprocal generator from subsystem-local coupling operators.
///
/// The coherent part is H = (λ/2)(O₁O₂ + h.c.); the jump is chosen by the
/// `variant` (see [`NonreciprocalVariant`]). System 1 is inferred as the
/// support of O₁ and system 2 as every other mode; O₂ must act only there
/// (checked both through number-operator commutation and through the sharper
/// support test, so purely diagonal cross-action is also rejected). λ is
/// required real and non-negative — a complex coupling phase belongs inside
/// O₁, which is what makes the real-λ convention fully general.
pub fn build_nonreciprocal(
    o1: &FockOperator,
    o2: &FockOperator,
    lambda: f64,
    variant: NonreciprocalVariant,
) -> Result<NonreciprocalModel> {
    if o1.space() != o2.space() {
        return Err(Error::InvalidArgument(
            "coupling operators live on different spaces".into(),
        ));
    }
    let space = o1.space().clone();
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "λ must be non-negative and finite (absorb its phase into O₁), got {lambda}"
        )));
    }
    match variant {
        NonreciprocalVariant::Pretuned { gamma, theta } => {
            if !gamma.is_finite() || gamma < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "Γ must be non-negative and finite, got {gamma}"
                )));
            }
            if !theta.is_finite() {
                return Err(Error::InvalidArgument("θ must be finite".into()));
            }
        }
        NonreciprocalVariant::Directional { eta, .. }
        | NonreciprocalVariant::Conjugated { eta, .. } => {
            if !eta.is_finite() || eta <= 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "η must be positive and finite, got {eta}"
                )));
            }
        }
    }

    // Infer the split: system 1 is the support of O₁, system 2 the rest.
    let s1 = o1.support()?;
    if s1.is_empty() {
        return Err(Error::InvalidCoupling(
            "O₁ acts on no mode (scalar operators cannot anchor subsystem 1)".into(),
        ));
    }
    let s2: Vec<usize> = (1..=space.num_modes()).filter(|m| !s1.contains(m)).collect();
    if s2.is_empty() {
        return Err(Error::InvalidCoupling(
            "O₁ touches every mode; no modes remain for subsystem 2".into(),
        ));
    }
    let o2_support = o2.support()?;
    if o2_support.is_empty() {
        return Err(Error::InvalidCoupling(
            "O₂ acts on no mode (scalar operators cannot anchor subsystem 2)".into(),
        ));
    }
    if !o2.is_local_to(&s2)? || o2_support.iter().any(|m| s1.contains(m)) {
        return Err(Error::InvalidCoupling(format!(
            "O₂ acts on subsystem-1 modes {s1:?} (its support is {o2_support:?})"
        )));
    }
    let part = Bipartition::new(&space, &s1, &s2)?;

    let pair = o1.mul(o2)?;
    let h = pair.add(&pair.adjoint())?.scale(C64::new(lambda / 2.0, 0.0));

    let (rate, jump) = match variant {
        NonreciprocalVariant::Pretuned { gamma, theta } => {
            // i·e^{iθ}: this sign is what makes the mean-value couplings come
            // out as λ̃₁₂ = λ + Γe^{−iθ}, λ̃₂₁ = λ − Γe^{−iθ}, and what makes
            // θ = π, Γ = λ coincide with the directional layout below.
            let phase = C64::new(0.0, 1.0) * C64::from_polar(1.0, theta);
            (gamma, o1.add(&o2.adjoint().scale(phase))?)
        }
        NonreciprocalVariant::Directional { eta, direction } => {
            let sign = match direction {
                InfluenceDirection::OneToTwo => C64::new(0.0, -1.0),
                InfluenceDirection::TwoToOne => C64::new(0.0, 1.0),
            };
            let l = o1
                .scale(C64::new(eta.sqrt(), 0.0))
                .add(&o2.adjoint().scale(sign / eta.sqrt()))?;
            (lambda, l)
        }
        NonreciprocalVariant::Conjugated { eta, direction } => {
            let sign = match direction {
                InfluenceDirection::OneToTwo => C64::new(0.0, -1.0),
                InfluenceDirection::TwoToOne => C64::new(0.0, 1.0),
            };
            let l = o1
                .adjoint()
                .scale(C64::new(eta.sqrt(), 0.0))
                .add(&o2.scale(sign / eta.sqrt()))?;
            (lambda, l)
        }
    };

    let model = LindbladModel::new(h, vec![(rate, jump)])?;
    Ok(NonreciprocalModel {
        model,
        part,
        o1: o1.clone(),
        o2: o2.clone(),
        lambda,
        variant,
    })
}

/// Verify the mean-value decomposition for a subsystem-local probe.
///
/// Computes d⟨A⟩/dt = tr(A·ℒρ) exactly, then re-computes it from the
/// two-term decomposition the directional structure predicts —
///
///   rate·tr(A·𝒟[O_local]ρ) − i·tr(A·[(λ̃/2)O₁O₂ + h.c., ρ])
///
/// with λ̃ = λ̃₁₂ for a system-1 probe and λ̃₂₁ for a system-2 probe — and
/// returns the absolute difference. The decomposition is an operator
/// identity, so the residual is at rounding level (≪ 1e−10) whenever the
/// probe is local to one side; a probe straddling both sides is rejected.
pub fn mean_value_eom_check(
    nr: &NonreciprocalModel,
    probe: &FockOperator,
    rho: &DensityMatrix,
) -> Result<f64> {
    if probe.space() != nr.model.space() || rho.space() != nr.model.space() {
        return Err(Error::InvalidArgument(
            "probe, state and model must share one space".into(),
        ));
    }
    let support = probe.support()?;
    let side = if support.iter().all(|m| nr.part.system1.contains(m)) {
        Side::One
    } else if support.iter().all(|m| nr.part.system2.contains(m)) {
        Side::Two
    } else {
        return Err(Error::InvalidArgument(format!(
            "probe acts on modes {support:?}, which straddle the bipartition {:?} | {:?}",
            nr.part.system1, nr.part.system2
        )));
    };

    let lhs = probe.expectation(&apply_liouvillian(&nr.model, rho.matrix()));

    let couplings = nr.effective_couplings();
    let lam = match side {
        Side::One => couplings.lambda12,
        Side::Two => couplings.lambda21,
    };
    let (rate, local_op) = nr.local_channel(side);
    let local_term = if rate > 0.0 {
        probe.expectation(&dissipator_matrix(local_op.matrix(), rho.matrix())) * rate
    } else {
        czero()
    };
    let pair = nr.o1.mul(&nr.o2)?;
    let interaction = pair
        .scale(lam * 0.5)
        .add(&pair.adjoint().scale(lam.conj() * 0.5))?;
    let comm = interaction.matrix().dot(rho.matrix()) - rho.matrix().dot(interaction.matrix());
    let comm_term = probe.expectation(&comm) * C64::new(0.0, -1.0);

    Ok((lhs - (local_term + comm_term)).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{identity, mode_creation, mode_number};
    use approx::assert_abs_diff_eq;
    use ndarray::Array2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;
    use rand_distr::StandardNormal;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_6, PI};

    fn random_matrix(d: usize, rng: &mut ChaCha12Rng) -> Array2<C64> {
        Array2::from_shape_fn((d, d), |_| {
            C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        })
    }

    /// Ginibre-random density matrix: GG†/tr(GG†).
    fn random_density(space: &FockSpace, rng: &mut ChaCha12Rng) -> DensityMatrix {
        let g = random_matrix(space.dim(), rng);
        let rho = g.dot(&dagger(&g.view()));
        let tr = trace(&rho).re;
        DensityMatrix::new(space, rho.mapv(|z| z / tr)).unwrap()
    }

    /// A random operator polynomial local to one mode.
    fn random_local_op(space: &FockSpace, mode: usize, rng: &mut ChaCha12Rng) -> FockOperator {
        let a = mode_annihilation(space, mode).unwrap();
        let n = mode_number(space, mode).unwrap();
        let aa = a.mul(&a).unwrap();
        let mut rand_c =
            || C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample(StandardNormal));
        a.scale(rand_c())
            .add(&a.adjoint().scale(rand_c()))
            .unwrap()
            .add(&n.scale(rand_c()))
            .unwrap()
            .add(&aa.scale(rand_c()))
            .unwrap()
    }

    fn max_diff(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
        norm_max(&(a - b).view())
    }

    // ---- dissipator -------------------------------------------------------

    #[test]
    fn dissipator_single_photon_decay_example() {
        let space = FockSpace::new(&[1]).unwrap();
        let a = mode_annihilation(&space, 1).unwrap();
        let rho = DensityMatrix::fock_state(&space, &[1]).unwrap();
        let d = dissipator(&a, &rho).unwrap();
        // 𝒟[a]|1⟩⟨1| = |0⟩⟨0| − |1⟩⟨1|
        assert_abs_diff_eq!(d[[0, 0]].re, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(d[[1, 1]].re, -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(d[[0, 1]].norm() + d[[1, 0]].norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn dissipator_identity_is_zero() {
        let space = FockSpace::new(&[2, 1]).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let rho = random_density(&space, &mut rng);
        let d = dissipator(&identity(&space), &rho).unwrap();
        assert!(norm_max(&d.view()) < 1e-14);
    }

    #[test]
    fn dissipator_cross_jump_is_traceless() {
        let space = FockSpace::new(&[2, 2]).unwrap();
        let a1 = mode_annihilation(&space, 1).unwrap();
        let a2 = mode_annihilation(&space, 2).unwrap();
        let l = a1.add(&a2.adjoint().scale(C64::new(0.0, -1.0))).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(12);
        for _ in 0..20 {
            let rho = random_density(&space, &mut rng);
            let d = dissipator(&l, &rho).unwrap();
            assert!(trace(&d).norm() < 1e-12);
        }
    }

    #[test]
    fn dissipator_rejects_space_mismatch() {
        let s1 = FockSpace::new(&[1]).unwrap();
        let s2 = FockSpace::new(&[2]).unwrap();
        let a = mode_annihilation(&s2, 1).unwrap();
        let rho = DensityMatrix::vacuum(&s1);
        assert!(matches!(
            dissipator(&a, &rho),
            Err(Error::InvalidArgument(_))
        ));
    }

    // ---- validation gates -------------------------------------------------

    #[test]
    fn density_matrix_validation_gates() {
        let space = FockSpace::new(&[1]).unwrap();
        // Wrong trace.
        let m = Array2::from_diag(&ndarray::arr1(&[C64::new(0.9, 0.0), czero()]));
        assert!(DensityMatrix::new(&space, m).is_err());
        // Not Hermitian.
        let mut m = Array2::from_diag(&ndarray::arr1(&[C64::new(1.0, 0.0), czero()]));
        m[[0, 1]] = C64::new(0.5, 0.0);
        assert!(DensityMatrix::new(&space, m).is_err());
        // Negative eigenvalue beyond the floor.
        let m = Array2::from_diag(&ndarray::arr1(&[C64::new(1.5, 0.0), C64::new(-0.5, 0.0)]));
        assert!(DensityMatrix::new(&space, m).is_err());
        // Unnormalized pure state.
        let psi = ndarray::arr1(&[C64::new(2.0, 0.0), czero()]);
        assert!(DensityMatrix::from_pure(&space, &psi).is_err());
    }

    #[test]
    fn model_validation_gates() {
        let space = FockSpace::new(&[2]).unwrap();
        let a = mode_annihilation(&space, 1).unwrap();
        // Non-Hermitian Hamiltonian.
        assert!(matches!(
            LindbladModel::new(a.clone(), vec![]),
            Err(Error::InvalidModel(_))
        ));
        // Negative rate.
        let n = mode_number(&space, 1).unwrap();
        assert!(matches!(
            LindbladModel::new(n.clone(), vec![(-1.0, a.clone())]),
            Err(Error::InvalidModel(_))
        ));
        // Space mismatch between H and jump.
        let other = FockSpace::new(&[3]).unwrap();
        let b = mode_annihilation(&other, 1).unwrap();
        assert!(matches!(
            LindbladModel::new(n, vec![(1.0, b)]),
            Err(Error::InvalidModel(_))
        ));
    }

    // ---- superoperator plumbing -------------------------------------------

    #[test]
    fn superoperator_matches_direct_application() {
        let space = FockSpace::new(&[2, 2]).unwrap();
        let model = ring_master_equation(0.7, 1.1, 0.9, &space)
            .unwrap()
            .with_jump(0.4, mode_annihilation(&space, 1).unwrap())
            .unwrap();
        let sup = superoperator_matrix(&model).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        for _ in 0..5 {
            let rho = random_density(&space, &mut rng);
            let direct = apply_liouvillian(&model, rho.matrix());
            let via_sup = unvec_col(&sup.dot(&vec_col(&rho.matrix().view())), space.dim());
            assert!(max_diff(&direct, &via_sup) < 1e-12);
        }
    }

    #[test]
    fn liouvillian_is_trace_preserving_on_random_states() {
        let space = FockSpace::new(&[2, 2]).unwrap();
        let a1 = mode_annihilation(&space, 1).unwrap();
        let a2 = mode_annihilation(&space, 2).unwrap();
        let ring = ring_master_equation(1.0, FRAC_PI_2, 2.0, &space).unwrap();
        let directional = build_nonreciprocal(
            &a1,
            &a2,
            0.8,
            NonreciprocalVariant::Directional {
                eta: 1.7,
                direction: InfluenceDirection::OneToTwo,
            },
        )
        .unwrap()
        .into_model();
        let pretuned = build_nonreciprocal(
            &a1,
            &a2,
            0.8,
            NonreciprocalVariant::Pretuned {
                gamma: 0.5,
                theta: 0.3,
            },
        )
        .unwrap()
        .into_model();
        let mut rng = ChaCha12Rng::seed_from_u64(22);
        for model in [&ring, &directional, &pretuned] {
            for _ in 0..100 {
                let rho = random_density(&space, &mut rng);
                let lrho = apply_liouvillian(model, rho.matrix());
                assert!(trace(&lrho).norm() < 1e-12);
            }
        }
    }

    // ---- evolve / propagate -----------------------------------------------

    #[test]
    fn evolve_zero_generator_is_constant() {
        let space = FockSpace::new(&[1, 1]).unwrap();
        let h = identity(&space)
            .sub(&identity(&space))
            .unwrap(); // explicit zero operator with the right space
        let model = LindbladModel::new(h, vec![]).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(31);
        let rho0 = random_density(&space, &mut rng);
        let traj = evolve(&model, &rho0, 2.0, 0.01).unwrap();
        assert!(max_diff(traj.final_state().matrix(), rho0.matrix()) < 1e-15);
    }

    #[test]
    fn evolve_reproduces_exponential_decay() {
        let space = FockSpace::new(&[4]).unwrap();
        let kappa = 1.7;
        let h = identity(&space).sub(&identity(&space)).unwrap();
        let a = mode_annihilation(&space, 1).unwrap();
        let model = LindbladModel::new(h, vec![(kappa, a)]).unwrap();
        // Superposition initial state: ⟨n⟩(0) = 2; the decay law ⟨n⟩(t) =
        // ⟨n⟩(0)e^{−κt} holds for any state under pure single-photon loss.
        let mut psi = space.basis_state(&[3]).unwrap();
        psi = psi + space.basis_state(&[1]).unwrap();
        psi.mapv_inplace(|z| z / C64::new(std::f64::consts::SQRT_2, 0.0));
        let rho0 = DensityMatrix::from_pure(&space, &psi).unwrap();
        let n_op = mode_number(&space, 1).unwrap();
        let traj = evolve(&model, &rho0, 2.0, 0.005).unwrap();
        let ns = traj.expectations(&n_op).unwrap();
        for (t, n) in traj.times().iter().zip(ns.iter()) {
            assert_abs_diff_eq!(n.re, 2.0 * (-kappa * t).exp(), epsilon = 1e-6);
            assert!(n.im.abs() < 1e-12);
        }
    }

    #[test]
    fn evolve_rejects_oversized_step() {
        let space = FockSpace::new(&[3]).unwrap();
        let model = LindbladModel::new(
            mode_number(&space, 1).unwrap(),
            vec![(2.0, mode_annihilation(&space, 1).unwrap())],
        )
        .unwrap();
        let rho0 = DensityMatrix::vacuum(&space);
        assert!(matches!(
            evolve(&model, &rho0, 1.0, 0.5),
            Err(Error::StepSize(_))
        ));
    }

    #[test]
    fn evolve_matches_exact_propagation() {
        let space = FockSpace::new(&[1, 1]).unwrap();
        let model = ring_master_equation(1.0, 0.8, 1.3, &space).unwrap();
        let mut psi = space.basis_state(&[1, 0]).unwrap();
        psi = psi + space.basis_state(&[0, 1]).unwrap();
        psi.mapv_inplace(|z| z / C64::new(std::f64::consts::SQRT_2, 0.0));
        let rho0 = DensityMatrix::from_pure(&space, &psi).unwrap();
        let traj = evolve(&model, &rho0, 1.3, 0.001).unwrap();
        let exact = propagate(&model, &rho0, 1.3).unwrap();
        assert!(max_diff(traj.final_state().matrix(), exact.matrix()) < 1e-8);
    }

    // ---- steady states ------------------------------------------------------

    #[test]
    fn steady_state_of_decaying_mode_is_vacuum() {
        let space = FockSpace::new(&[3]).unwrap();
        let h = identity(&space).sub(&identity(&space)).unwrap();
        let a = mode_annihilation(&space, 1).unwrap();
        let model = LindbladModel::new(h, vec![(0.8, a)]).unwrap();
        let ss = steady_state(&model).unwrap();
        assert!(max_diff(ss.matrix(), DensityMatrix::vacuum(&space).matrix()) < 1e-10);
    }

    #[test]
    fn steady_state_of_driven_cavity_matches_long_time_propagation() {
        let space = FockSpace::new(&[5]).unwrap();
        let a = mode_annihilation(&space, 1).unwrap();
        let drive = a.add(&a.adjoint()).unwrap().scale(C64::new(0.2, 0.0));
        let model = LindbladModel::new(drive, vec![(1.0, a.clone())]).unwrap();
        let ss = steady_state(&model).unwrap();
        let late = propagate(&model, &DensityMatrix::vacuum(&space), 40.0).unwrap();
        assert!(max_diff(ss.matrix(), late.matrix()) < 1e-8);
        // Mean field: ⟨a⟩_ss = −2iΩ/κ = −0.4i (up to truncation).
        let avg = ss.expectation(&a).unwrap();
        assert_abs_diff_eq!(avg.im, -0.4, epsilon = 1e-4);
        assert_abs_diff_eq!(avg.re, 0.0, epsilon = 1e-4);
    }

    #[test]
    fn steady_state_rejects_degenerate_null_space() {
        let space = FockSpace::new(&[2]).unwrap();
        // No dissipation: every function of H is stationary.
        let model = LindbladModel::new(mode_number(&space, 1).unwrap(), vec![]).unwrap();
        assert!(matches!(
            steady_state(&model),
            Err(Error::NonUniqueSteadyState { .. })
        ));
    }

    #[test]
    fn cascaded_two_photon_steady_state_matches_long_time_limit() {
        // The cascaded pair with weak local two-photon drives — the scenario
        // whose steady state carries entanglement. Here we only pin the
        // steady-state solver against exact long-time propagation.
        let space = FockSpace::new(&[4, 4]).unwrap();
        let a1 = mode_annihilation(&space, 1).unwrap();
        let a2m = mode_annihilation(&space, 2).unwrap();
        let o2 = mode_creation(&space, 2).unwrap(); // O₂† = a₂
        let nr = build_nonreciprocal(
            &a1,
            &o2,
            1.0,
            NonreciprocalVariant::Directional {
                eta: 1.0,
                direction: InfluenceDirection::OneToTwo,
            },
        )
        .unwrap();
        let d = C64::new(0.0, 0.2);
        let mut h_drive = a1
            .adjoint()
            .mul(&a1.adjoint())
            .unwrap()
            .scale(d * 0.5);
        h_drive = h_drive
            .add(&a2m.adjoint().mul(&a2m.adjoint()).unwrap().scale(d * 0.5))
            .unwrap();
        let h_drive = h_drive.add(&h_drive.adjoint()).unwrap();
        let model = nr.model().with_added_hamiltonian(&h_drive).unwrap();
        let ss = steady_state(&model).unwrap();
        let late = propagate(&model, &DensityMatrix::vacuum(&space), 46.0).unwrap();
        assert!(max_diff(ss.matrix(), late.matrix()) < 1e-6);
        // The drives populate the cavities: the steady state is not vacuum.
        assert!(max_diff(ss.matrix(), DensityMatrix::vacuum(&space).matrix()) > 1e-3);
    }

    #[test]
    fn jump_resummation_matches_dense_steady_state() {
        // Driven cavity: small enough to compare solvers entry by entry.
        let space = FockSpace::new(&[5]).unwrap();
        let a = mode_annihilation(&space, 1).unwrap();
        let drive = a.add(&a.adjoint()).unwrap().scale(C64::new(0.2, 0.0));
        let model = LindbladModel::new(drive, vec![(1.0, a)]).unwrap();
        let dense = steady_state(&model).unwrap();
        let large = steady_state_large(&model).unwrap();
        assert!(max_diff(dense.matrix(), large.matrix()) < 1e-10);

        // Driven cascaded pair (D = 25): the solver the entanglement scenario
        // leans on once the dense superoperator no longer fits.
        let space = FockSpace::new(&[4, 4]).unwrap();
        let a1 = mode_annihilation(&space, 1).unwrap();
        let a2m = mode_annihilation(&space, 2).unwrap();
        let nr = build_nonreciprocal(
            &a1,
            &mode_creation(&space, 2).unwrap(),
            1.0,
            NonreciprocalVariant::Directional {
                eta: 1.0,
                direction: InfluenceDirection::OneToTwo,
            },
        )
        .unwrap();
        let d = C64::new(0.0, 0.2);
        let mut h_drive = a1.adjoint().mul(&a1.adjoint()).unwrap().scale(d * 0.5);
        h_drive = h_drive
            .add(&a2m.adjoint().mul(&a2m.adjoint()).unwrap().scale(d * 0.5))
            .unwrap();
        let h_drive = h_drive.add(&h_drive.adjoint()).unwrap();
        let model = nr.model().with_added_hamiltonian(&h_drive).unwrap();
        let dense = steady_state(&model).unwrap();
        let large = steady_state_large(&model).unwrap();
        assert!(max_diff(dense.matrix(), large.matrix()) < 1e-10);
    }

    #[test]
    fn jump_resummation_handles_dark_steady_state() {
        // Undriven decay leaves the vacuum dark (an undamped direction of
        // H_eff); the shifted preconditioner stays regular there and the
        // iteration settles on the vacuum.
        let space = FockSpace::new(&[3]).unwrap();
        let h = identity(&space).sub(&identity(&space)).unwrap();
        let a = mode_annihilation(&space, 1).unwrap();
        let model = LindbladModel::new(h, vec![(0.8, a)]).unwrap();
        let ss = steady_state_large(&model).unwrap();
        assert!(max_diff(ss.matrix(), DensityMatrix::vacuum(&space).matrix()) < 1e-10);
    }

    #[test]
    fn jump_resummation_needs_dissipation() {
        let space = FockSpace::new(&[2]).unwrap();
        let model = LindbladModel::new(mode_number(&space, 1).unwrap(), vec![]).unwrap();
        assert!(matches!(
            steady_state_large(&model),
            Err(Error::InvalidArgument(_))
        ));
    }

    // ---- non-Hermitian part -------------------------------------------------

    #[test]
    fn nonhermitian_part_without_jumps_is_hamiltonian() {
        let space = FockSpace::new(&[2]).unwrap();
        let h = mode_number(&space, 1).unwrap();
        let model = LindbladModel::new(h.clone(), vec![]).unwrap();
        let nh = nonhermitian_part(&model).unwrap();
        assert!(max_diff(nh.matrix(), h.matrix()) < 1e-15);
    }

    #[test]
    fn nonhermitian_part_of_tuned_ring_is_one_way() {
        let t = 1.0;
        let space = FockSpace::new(&[1, 1]).unwrap();
        let model = ring_master_equation(t, FRAC_PI_2, 2.0 * t, &space).unwrap();
        let nh = nonhermitian_part(&model).unwrap();
        let ket10 = space.basis_state(&[1, 0]).unwrap();
        let ket01 = space.basis_state(&[0, 1]).unwrap();
        let elem = |bra: &ndarray::Array1<C64>, ket: &ndarray::Array1<C64>| -> C64 {
            let applied = nh.matrix().dot(ket);
            bra.iter()
                .zip(applied.iter())
                .map(|(b, a)| b.conj() * a)
                .fold(czero(), |acc, z| acc + z)
        };
        // Coefficient of a₂†a₁ = ⟨01|H_NH|10⟩ = −t − i(κ̃/2)e^{iΦ} = 0 here;
        // the reverse coefficient is −t − i(κ̃/2)e^{−iΦ} = −2t.
        assert!(elem(&ket01, &ket10).norm() < 1e-12);
        let back = elem(&ket10, &ket01);
        assert_abs_diff_eq!(back.re, -2.0 * t, epsilon = 1e-12);
        assert_abs_diff_eq!(back.im, 0.0, epsilon = 1e-12);
        // Diagonal damping −i(κ̃/2) on each singly occupied state.
        let diag = elem(&ket10, &ket10);
        assert_abs_diff_eq!(diag.im, -t, epsilon = 1e-12);
    }

    #[test]
    fn nonhermitian_part_with_hermitian_couplings_is_block_local() {
        // For Hermitian O₁, O₂ the dissipative cross terms cancel: H_NH −
        // H_coh must equal −(iλ/2)(ηO₁² + O₂²/η), with no two-system term.
        let space = FockSpace::new(&[2, 2]).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(41);
        let raw1 = random_local_op(&space, 1, &mut rng);
        let raw2 = random_local_op(&space, 2, &mut rng);
        let o1 = raw1.add(&raw1.adjoint()).unwrap().scale(C64::new(0.5, 0.0));
        let o2 = raw2.add(&raw2.adjoint()).unwrap().scale(C64::new(0.5, 0.0));
        let (lambda, eta) = (0.9, 1.6);
        let nr = build_nonreciprocal(
            &o1,
            &o2,
            lambda,
            NonreciprocalVariant::Directional {
                eta,
                direction: InfluenceDirection::OneToTwo,
            },
        )
        .unwrap();
        let nh = nonhermitian_part(nr.model()).unwrap();
        let local = nh.sub(nr.model().hamiltonian()).unwrap();
        let expected = o1
            .mul(&o1)
            .unwrap()
            .scale(C64::new(0.0, -lambda * eta / 2.0))
            .add(
                &o2.mul(&o2)
                    .unwrap()
                    .scale(C64::new(0.0, -lambda / (eta * 2.0))),
            )
            .unwrap();
        assert!(max_diff(local.matrix(), expected.matrix()) < 1e-12);
    }

    // ---- ring couplings and the 2×2 oracle ----------------------------------

    #[test]
    fn ring_couplings_match_mean_value_extraction() {
        let space = FockSpace::new(&[1, 1]).unwrap();
        let (t, flux, kt) = (1.0, 0.77, 1.3);
        let model = ring_master_equation(t, flux, kt, &space).unwrap();
        let a1 = mode_annihilation(&space, 1).unwrap();
        let a2 = mode_annihilation(&space, 2).unwrap();
        let vac = space.vacuum();
        let ket10 = space.basis_state(&[1, 0]).unwrap();
        let ket01 = space.basis_state(&[0, 1]).unwrap();
        let outer = |u: &ndarray::Array1<C64>, v: &ndarray::Array1<C64>| -> Array2<C64> {
            let d = u.len();
            Array2::from_shape_fn((d, d), |(i, j)| u[i] * v[j].conj())
        };
        // ℒ is linear, so coefficients can be read off from non-state
        // arguments: with ρ = |01⟩⟨00|, ⟨a₁⟩ = 0 and ⟨a₂⟩ = 1, so
        // tr(a₁·ℒρ) = i·t̃₁₂.
        let (t12, t21) = ring_couplings(t, flux, kt);
        let rho_c = outer(&ket01, &vac);
        let got12 = a1.expectation(&apply_liouvillian(&model, &rho_c));
        assert!((got12 - C64::new(0.0, 1.0) * t12).norm() < 1e-13);
        let rho_c = outer(&ket10, &vac);
        let got21 = a2.expectation(&apply_liouvillian(&model, &rho_c));
        assert!((got21 - C64::new(0.0, 1.0) * t21).norm() < 1e-13);
        // Tuned point: κ̃ = 2t, Φ = +π/2 kills t̃₂₁ exactly (2 → 1).
        let tuned = ring_master_equation(t, FRAC_PI_2, 2.0 * t, &space).unwrap();
        let got = a2.expectation(&apply_liouvillian(&tuned, &outer(&ket10, &vac)));
        assert!(got.norm() < 1e-14);
        let got = a1.expectation(&apply_liouvillian(&tuned, &outer(&ket01, &vac)));
        assert!((got - C64::new(0.0, 2.0 * t)).norm() < 1e-13);
    }

    #[test]
    fn ring_mean_values_follow_effective_two_by_two() {
        // The sampled ⟨a_j⟩(t) must match the 2×2 linear ODE
        // d/dt (⟨a₁⟩,⟨a₂⟩) = −i·H_eff,2 (⟨a₁⟩,⟨a₂⟩) with
        // H_eff,2 = [[−i(κ₁+κ̃)/2, −t̃₁₂], [−t̃₂₁, −i(κ₂+κ̃)/2]].
        let space = FockSpace::new(&[1, 1]).unwrap();
        let (t, flux, kt, k1, k2) = (1.0, 0.9, 0.8, 0.3, 0.1);
        let model = ring_master_equation(t, flux, kt, &space)
            .unwrap()
            .with_jump(k1, mode_annihilation(&space, 1).unwrap())
            .unwrap()
            .with_jump(k2, mode_annihilation(&space, 2).unwrap())
            .unwrap();
        let mut psi = space.vacuum();
        psi = psi + space.basis_state(&[1, 0]).unwrap() + space.basis_state(&[0, 1]).unwrap();
        psi.mapv_inplace(|z| z / C64::new(3.0_f64.sqrt(), 0.0));
        let rho0 = DensityMatrix::from_pure(&space, &psi).unwrap();
        let traj = evolve(&model, &rho0, 3.0, 0.001).unwrap();
        let a1 = mode_annihilation(&space, 1).unwrap();
        let a2 = mode_annihilation(&space, 2).unwrap();
        let m1 = traj.expectations(&a1).unwrap();
        let m2 = traj.expectations(&a2).unwrap();
        let (t12, t21) = ring_couplings(t, flux, kt);
        let heff = ndarray::array![
            [C64::new(0.0, -(k1 + kt) / 2.0), -t12],
            [-t21, C64::new(0.0, -(k2 + kt) / 2.0)]
        ];
        let v0 = ndarray::arr1(&[m1[0], m2[0]]);
        for (k, &tk) in traj.times().iter().enumerate() {
            let prop = expm(&heff.mapv(|z| z * C64::new(0.0, -tk)).view()).unwrap();
            let v = prop.dot(&v0);
            assert!((v[0] - m1[k]).norm() < 1e-8, "⟨a₁⟩ deviates at t={tk}");
            assert!((v[1] - m2[k]).norm() < 1e-8, "⟨a₂⟩ deviates at t={tk}");
        }
    }

    // ---- adiabatic elimination ----------------------------------------------

    #[test]
    fn adiabatic_elimination_formulas_and_tuned_point() {
        let t = 1.0_f64;
        let kappa3 = 20_000.0;
        let t_prime = (kappa3 * t / 2.0).sqrt(); // 2t′²/κ₃ = t
        let space = FockSpace::new(&[1, 1]).unwrap();
        let elim =
            adiabatic_eliminate(t, t_prime, FRAC_PI_6, 0.0, 0.0, kappa3, &space).unwrap();
        assert_abs_diff_eq!(elim.kappa_tilde, 4.0 * t_prime * t_prime / kappa3, epsilon = 1e-12);
        // Matched point at φ = π/6 (Φ = π/2): t̃₂₁ vanishes, |t̃₁₂| = 2t.
        assert!(elim.t21.norm() < 1e-14);
        assert_abs_diff_eq!(elim.t12.norm(), 2.0 * t, epsilon = 1e-13);
        // The formula's own structure: t̃₁₂ = e^{iφ}t(1 + i e^{−3iφ}).
        let predicted = C64::from_polar(t, FRAC_PI_6)
            * (C64::new(1.0, 0.0) + C64::new(0.0, 1.0) * C64::from_polar(1.0, -3.0 * FRAC_PI_6));
        assert!((elim.t12 - predicted).norm() < 1e-13);
        // κ₃/t′ = √(2κ₃) ≈ 200 ⟹ no warning at this scale.
        assert!(elim.warning.is_none());
        // Milder scales warn without failing.
        let soft = adiabatic_eliminate(1.0, 2.0, 0.1, 0.0, 0.0, 100.0, &space).unwrap();
        assert!(soft.warning.is_some());
        let hard = adiabatic_eliminate(1.0, 10.0, 0.1, 0.0, 0.0, 50.0, &space).unwrap();
        assert!(hard.warning.as_deref().unwrap().contains("unreliable"));
        // Nonsensical parameters still fail.
        assert!(adiabatic_eliminate(1.0, 1.0, 0.0, 0.0, 0.0, -1.0, &space).is_err());
    }

    #[test]
    fn eliminated_model_tracks_full_three_mode_ring() {
        // Full three-mode integration vs the eliminated two-mode model at
        // κ₃ = 100t, matched 2t′²/κ₃ = t, φ = π/6. Mode-1 amplitudes are
        // compared through the gauge map ⟨a₁⟩_model = e^{−iφ}⟨a₁⟩_full.
        let t = 1.0_f64;
        let kappa3 = 100.0 * t;
        let t_prime = (kappa3 * t / 2.0).sqrt();
        let phi = FRAC_PI_6;
        let dt = 4.0e-4;
        let t_final = 5.0;

        let full_space = FockSpace::new(&[1, 1, 1]).unwrap();
        let full = ring_with_auxiliary_mode(t, t_prime, phi, 0.0, 0.0, kappa3, &full_space)
            .unwrap();
        let mut psi = full_space.vacuum();
        psi = psi
            + full_space.basis_state(&[1, 0, 0]).unwrap()
            + full_space.basis_state(&[0, 1, 0]).unwrap();
        psi.mapv_inplace(|z| z / C64::new(3.0_f64.sqrt(), 0.0));
        let rho0_full = DensityMatrix::from_pure(&full_space, &psi).unwrap();
        let traj_full = evolve(&full, &rho0_full, t_final, dt).unwrap();

        let ring_space = FockSpace::new(&[1, 1]).unwrap();
        let elim = adiabatic_eliminate(t, t_prime, phi, 0.0, 0.0, kappa3, &ring_space).unwrap();
        let gauge = C64::from_polar(1.0, -phi);
        let mut psi_r = ring_space.vacuum();
        psi_r = psi_r
            + ring_space.basis_state(&[1, 0]).unwrap().mapv(|z| z * gauge)
            + ring_space.basis_state(&[0, 1]).unwrap();
        psi_r.mapv_inplace(|z| z / C64::new(3.0_f64.sqrt(), 0.0));
        let rho0_ring = DensityMatrix::from_pure(&ring_space, &psi_r).unwrap();
        let traj_ring = evolve(&elim.model, &rho0_ring, t_final, dt).unwrap();

        assert_eq!(traj_full.times(), traj_ring.times());
        let a1_full = traj_full
            .expectations(&mode_annihilation(&full_space, 1).unwrap())
            .unwrap();
        let a2_full = traj_full
            .expectations(&mode_annihilation(&full_space, 2).unwrap())
            .unwrap();
        let a1_ring = traj_ring
            .expectations(&mode_annihilation(&ring_space, 1).unwrap())
            .unwrap();
        let a2_ring = traj_ring
            .expectations(&mode_annihilation(&ring_space, 2).unwrap())
            .unwrap();

        let sup = |xs: &[C64]| xs.iter().map(|z| z.norm()).fold(0.0_f64, f64::max);
        let dev1 = a1_full
            .iter()
            .zip(a1_ring.iter())
            .map(|(f, r)| (f * gauge - r).norm())
            .fold(0.0_f64, f64::max);
        let dev2 = a2_full
            .iter()
            .zip(a2_ring.iter())
            .map(|(f, r)| (f - r).norm())
            .fold(0.0_f64, f64::max);
        assert!(
            dev1 <= 0.05 * sup(&a1_full),
            "mode-1 deviation {dev1:.4} vs amplitude {:.4}",
            sup(&a1_full)
        );
        assert!(
            dev2 <= 0.05 * sup(&a2_full),
            "mode-2 deviation {dev2:.4} vs amplitude {:.4}",
            sup(&a2_full)
        );
    }

    // ---- the general recipe ---------------------------------------------------

    #[test]
    fn build_infers_bipartition_and_gates_locality() {
        let space = FockSpace::new(&[2, 2]).unwrap();
        let a1 = mode_annihilation(&space, 1).unwrap();
        let a2 = mode_annihilation(&space, 2).unwrap();
        let nr = build_nonreciprocal(
            &a1,
            &a2,
            1.0,
            NonreciprocalVariant::Directional {
                eta: 1.0,
                direction: InfluenceDirection::OneToTwo,
            },
        )
        .unwrap();
        assert_eq!(nr.bipartition().system1, vec![1]);
        assert_eq!(nr.bipartition().system2, vec![2]);
        // O₂ crossing into subsystem 1 — even via purely diagonal action —
        // is rejected.
        let crossing = a2.mul(&mode_number(&space, 1).unwrap()).unwrap();
        assert!(matches!(
            build_nonreciprocal(
                &a1,
                &crossing,
                1.0,
                NonreciprocalVariant::Pretuned {
                    gamma: 1.0,
                    theta: 0.0
                }
            ),
            Err(Error::InvalidCoupling(_))
        ));
        // O₁ touching everything leaves no room for system 2.
        let everywhere = a1.mul(&a2).unwrap();
        assert!(matches!(
            build_nonreciprocal(
                &everywhere,
                &a2,
                1.0,
                NonreciprocalVariant::Pretuned {
                    gamma: 1.0,
                    theta: 0.0
                }
            ),
            Err(Error::InvalidCoupling(_))
        ));
    }

    #[test]
    fn cascaded_construction_matches_expected_operators() {
        // Directional, η = 1, influence 1→2, O₁ = a₁, O₂† = a₂: the cascaded
        // two-cavity model with jump a₁ − i·a₂ and beam-splitter coupling.
        let space = FockSpace::new(&[2, 2]).unwrap();
        let a1 = mode_annihilation(&space, 1).unwrap();
        let a2 = mode_annihilation(&space, 2).unwrap();
        let o2 = mode_creation(&space, 2).unwrap();
        let lambda = 1.3;
        let nr = build_nonreciprocal(
            &a1,
            &o2,
            lambda,
            NonreciprocalVariant::Directional {
                eta: 1.0,
                direction: InfluenceDirection::OneToTwo,
            },
        )
        .unwrap();
        let expected_jump = a1.add(&a2.scale(C64::new(0.0, -1.0))).unwrap();
        let (rate, jump) = &nr.model().jumps()[0];
        assert_abs_diff_eq!(*rate, lambda, epsilon = 1e-15);
        assert!(max_diff(jump.matrix(), expected_jump.matrix()) < 1e-14);
        let hop = a1.adjoint().mul(&a2).unwrap();
        let expected_h = hop
            .add(&hop.adjoint())
            .unwrap()
            .scale(C64::new(lambda / 2.0, 0.0));
        assert!(max_diff(nr.model().hamiltonian().matrix(), expected_h.matrix()) < 1e-14);
    }

    #[test]
    fn pretuned_at_theta_pi_equals_directional_generator() {
        let space = FockSpace::new(&[2, 2]).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(51);
        let o1 = random_local_op(&space, 1, &mut rng);
        let o2 = random_local_op(&space, 2, &mut rng);
        let lambda = 0.9;
        let pre = build_nonreciprocal(
            &o1,
            &o2,
            lambda,
            NonreciprocalVariant::Pretuned {
                gamma: lambda,
                theta: PI,
            },
        )
        .unwrap();
        let dir = build_nonreciprocal(
            &o1,
            &o2,
            lambda,
            NonreciprocalVariant::Directional {
                eta: 1.0,
                direction: InfluenceDirection::OneToTwo,
            },
        )
        .unwrap();
        let sup_pre = superoperator_matrix(pre.model()).unwrap();
        let sup_dir = superoperator_matrix(dir.model()).unwrap();
        assert!(max_diff(&sup_pre, &sup_dir) < 1e-12);
    }

    #[test]
    fn vanishing_couplings_give_zero_generator() {
        let space = FockSpace::new(&[1, 1]).unwrap();
        let a1 = mode_annihilation(&space, 1).unwrap();
        let a2 = mode_annihilation(&space, 2).unwrap();
        let nr = build_nonreciprocal(
            &a1,
            &a2,
            0.0,
            NonreciprocalVariant::Pretuned {
                gamma: 0.0,
                theta: 0.4,
            },
        )
        .unwrap();
        let sup = superoperator_matrix(nr.model()).unwrap();
        assert!(norm_max(&sup.view()) < 1e-15);
    }

    #[test]
    fn effective_coupling_examples() {
        // Γ = 0: both sides see the bare λ.
        let c = effective_couplings(0.7, 0.0, 1.3);
        assert!((c.lambda12 - C64::new(0.7, 0.0)).norm() < 1e-15);
        assert!((c.lambda21 - C64::new(0.7, 0.0)).norm() < 1e-15);
        assert!(!c.is_directional());
        // λ = 1, Γ = 1, θ = π/2: (1−i, 1+i).
        let c = effective_couplings(1.0, 1.0, FRAC_PI_2);
        assert!((c.lambda12 - C64::new(1.0, -1.0)).norm() < 1e-15);
        assert!((c.lambda21 - C64::new(1.0, 1.0)).norm() < 1e-15);
        // Γe^{−iθ} = −λ (θ = π, Γ = λ): (0, 2λ) up to the rounding of e^{−iπ}.
        let lambda = 0.8;
        let c = effective_couplings(lambda, lambda, PI);
        assert!(c.lambda12.norm() <= 4.0 * f64::EPSILON * lambda);
        assert!((c.lambda21 - C64::new(2.0 * lambda, 0.0)).norm() <= 4.0 * f64::EPSILON * lambda);
        assert!(c.is_directional());
        // The directional layout carries (0, 2λ) exactly by construction.
        let space = FockSpace::new(&[1, 1]).unwrap();
        let a1 = mode_annihilation(&space, 1).unwrap();
        let a2 = mode_annihilation(&space, 2).unwrap();
        let nr = build_nonreciprocal(
            &a1,
            &a2,
            lambda,
            NonreciprocalVariant::Directional {
                eta: 2.0,
                direction: InfluenceDirection::OneToTwo,
            },
        )
        .unwrap();
        let c = nr.effective_couplings();
        assert_eq!(c.lambda12, czero());
        assert_eq!(c.lambda21, C64::new(2.0 * lambda, 0.0));
    }

    #[test]
    fn mean_value_decomposition_holds_for_local_probes() {
        let space = FockSpace::new(&[2, 2]).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(61);
        let o1 = random_local_op(&space, 1, &mut rng);
        let o2 = random_local_op(&space, 2, &mut rng);
        let rho = random_density(&space, &mut rng);
        let a1 = mode_annihilation(&space, 1).unwrap();
        let n1 = mode_number(&space, 1).unwrap();
        let a2 = mode_annihilation(&space, 2).unwrap();
        let n2 = mode_number(&space, 2).unwrap();
        let x1 = a1.add(&a1.adjoint()).unwrap().scale(C64::new(0.5, 0.0));
        let probes = [&a1, &n1, &a2, &n2, &x1];

        let variants = [
            NonreciprocalVariant::Pretuned {
                gamma: 0.6,
                theta: 1.1,
            },
            NonreciprocalVariant::Pretuned {
                gamma: 0.0,
                theta: 0.0,
            },
            NonreciprocalVariant::Directional {
                eta: 0.7,
                direction: InfluenceDirection::OneToTwo,
            },
            NonreciprocalVariant::Directional {
                eta: 3.0,
                direction: InfluenceDirection::TwoToOne,
            },
            NonreciprocalVariant::Conjugated {
                eta: 1.4,
                direction: InfluenceDirection::OneToTwo,
            },
            NonreciprocalVariant::Conjugated {
                eta: 0.5,
                direction: InfluenceDirection::TwoToOne,
            },
        ];
        for variant in variants {
            let nr = build_nonreciprocal(&o1, &o2, 0.9, variant).unwrap();
            for probe in probes {
                let res = mean_value_eom_check(&nr, probe, &rho).unwrap();
                assert!(res < 1e-10, "residual {res:.3e} for {variant:?}");
            }
        }
        // A probe straddling the split is rejected.
        let straddle = a1.mul(&a2).unwrap();
        let nr = build_nonreciprocal(&o1, &o2, 0.9, variants[0]).unwrap();
        assert!(mean_value_eom_check(&nr, &straddle, &rho).is_err());
    }

    #[test]
    fn interaction_couplings_are_eta_independent() {
        // The λ̃ pair entering the decomposition is fixed at (0, 2λ) for every
        // η; only the local channel rates scale (as η and 1/η). Residuals at
        // rounding level across a decade of η certify both statements.
        let space = FockSpace::new(&[2, 2]).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(62);
        let o1 = random_local_op(&space, 1, &mut rng);
        let o2 = random_local_op(&space, 2, &mut rng);
        let rho = random_density(&space, &mut rng);
        let n1 = mode_number(&space, 1).unwrap();
        let n2 = mode_number(&space, 2).unwrap();
        let lambda = 1.1;
        for eta in [0.5, 1.0, 2.0, 5.0] {
            let nr = build_nonreciprocal(
                &o1,
                &o2,
                lambda,
                NonreciprocalVariant::Directional {
                    eta,
                    direction: InfluenceDirection::OneToTwo,
                },
            )
            .unwrap();
            let c = nr.effective_couplings();
            assert_eq!(c.lambda12, czero());
            assert_eq!(c.lambda21, C64::new(2.0 * lambda, 0.0));
            for probe in [&n1, &n2] {
                let res = mean_value_eom_check(&nr, probe, &rho).unwrap();
                assert!(res < 1e-10, "residual {res:.3e} at η={eta}");
            }
        }
    }

    #[test]
    fn directional_model_shields_the_driving_system() {
        // System-1 reduced dynamics must be exactly invariant under any
        // Hamiltonian added on system 2 (and vice versa for the other sign).
        let space = FockSpace::new(&[2, 2]).unwrap();
        let a1 = mode_annihilation(&space, 1).unwrap();
        let a2 = mode_annihilation(&space, 2).unwrap();
        let nr = build_nonreciprocal(
            &a1,
            &a2,
            1.0,
            NonreciprocalVariant::Directional {
                eta: 0.8,
                direction: InfluenceDirection::OneToTwo,
            },
        )
        .unwrap();
        let part = nr.bipartition().clone();
        let mut psi = space.vacuum();
        psi = psi + space.basis_state(&[1, 0]).unwrap() + space.basis_state(&[0, 1]).unwrap();
        psi.mapv_inplace(|z| z / C64::new(3.0_f64.sqrt(), 0.0));
        let rho0 = DensityMatrix::from_pure(&space, &psi).unwrap();

        let n2 = mode_number(&space, 2).unwrap();
        let x2 = a2.add(&a2.adjoint()).unwrap();
        let sq2 = a2.mul(&a2).unwrap();
        let sq2 = sq2.add(&sq2.adjoint()).unwrap();
        let perturbations = [
            n2.scale(C64::new(0.7, 0.0))
                .add(&x2.scale(C64::new(0.4, 0.0)))
                .unwrap(),
            sq2.scale(C64::new(0.9, 0.0)),
            n2.scale(C64::new(-1.3, 0.0)),
        ];
        for h2 in &perturbations {
            let perturbed = nr.model().with_added_hamiltonian(h2).unwrap();
            for tau in [0.4, 1.1] {
                let base = propagate(nr.model(), &rho0, tau).unwrap();
                let pert = propagate(&perturbed, &rho0, tau).unwrap();
                let d1 = base
                    .reduced_system1(&part)
                    .unwrap()
                    .trace_distance(&pert.reduced_system1(&part).unwrap())
                    .unwrap();
                assert!(d1 < 1e-9, "system-1 state moved by {d1:.3e}");
            }
        }
        // The converse perturbation *does* move system 2.
        let h1 = mode_number(&space, 1)
            .unwrap()
            .scale(C64::new(0.7, 0.0))
            .add(&a1.add(&a1.adjoint()).unwrap().scale(C64::new(0.4, 0.0)))
            .unwrap();
        let perturbed = nr.model().with_added_hamiltonian(&h1).unwrap();
        let base = propagate(nr.model(), &rho0, 1.1).unwrap();
        let pert = propagate(&perturbed, &rho0, 1.1).unwrap();
        let d2 = base
            .reduced_system2(&part)
            .unwrap()
            .trace_distance(&pert.reduced_system2(&part).unwrap())
            .unwrap();
        assert!(d2 > 1e-6, "system-2 state should respond, moved {d2:.3e}");

        // With the opposite sign the shield swaps sides.
        let nr_rev = build_nonreciprocal(
            &a1,
            &a2,
            1.0,
            NonreciprocalVariant::Directional {
                eta: 0.8,
                direction: InfluenceDirection::TwoToOne,
            },
        )
        .unwrap();
        let perturbed = nr_rev.model().with_added_hamiltonian(&h1).unwrap();
        let base = propagate(nr_rev.model(), &rho0, 1.1).unwrap();
        let pert = propagate(&perturbed, &rho0, 1.1).unwrap();
        let d2 = base
            .reduced_system2(&part)
            .unwrap()
            .trace_distance(&pert.reduced_system2(&part).unwrap())
            .unwrap();
        assert!(d2 < 1e-9, "system-2 state moved by {d2:.3e}");
    }

    #[test]
    fn conjugated_variant_shields_equally() {
        let space = FockSpace::new(&[2, 2]).unwrap();
        let a1 = mode_annihilation(&space, 1).unwrap();
        let a2 = mode_annihilation(&space, 2).unwrap();
        let nr = build_nonreciprocal(
            &a1,
            &a2,
            1.0,
            NonreciprocalVariant::Conjugated {
                eta: 1.5,
                direction: InfluenceDirection::OneToTwo,
            },
        )
        .unwrap();
        let part = nr.bipartition().clone();
        let rho0 = DensityMatrix::vacuum(&space);
        let h2 = mode_number(&space, 2)
            .unwrap()
            .scale(C64::new(0.6, 0.0))
            .add(
                &a2.add(&a2.adjoint())
                    .unwrap()
                    .scale(C64::new(0.5, 0.0)),
            )
            .unwrap();
        let perturbed = nr.model().with_added_hamiltonian(&h2).unwrap();
        let base = propagate(nr.model(), &rho0, 0.9).unwrap();
        let pert = propagate(&perturbed, &rho0, 0.9).unwrap();
        let d1 = base
            .reduced_system1(&part)
            .unwrap()
            .trace_distance(&pert.reduced_system1(&part).unwrap())
            .unwrap();
        assert!(d1 < 1e-9);
        // The conjugated local channel heats the driver: starting from
        // vacuum, system 1 gains population under 𝒟[a₁†].
        let n1 = base
            .reduced_system1(&part)
            .unwrap()
            .expectation(&mode_number(&FockSpace::new(&[2]).unwrap(), 1).unwrap())
            .unwrap();
        assert!(n1.re > 0.1, "heating channel left ⟨n₁⟩ = {}", n1.re);
    }

    #[test]
    fn quadrature_split_is_not_the_coherent_jump() {
        // 𝒟[O₁ − iO₂†] is *not* 𝒟[X₁ − iX₂] + 𝒟[P₁ − iP₂]: the correlated
        // single channel cannot be split into two Hermitian-quadrature
        // channels, which is exactly what separates coherent directional
        // coupling from measurement-plus-feedforward.
        let space = FockSpace::new(&[2, 2]).unwrap();
        let lambda = 1.0;
        for seed in 0..5 {
            let mut rng = ChaCha12Rng::seed_from_u64(70 + seed);
            let o1 = random_local_op(&space, 1, &mut rng);
            let o2 = random_local_op(&space, 2, &mut rng);
            let half = C64::new(0.5, 0.0);
            let mi_half = C64::new(0.0, -0.5);
            let x1 = o1.add(&o1.adjoint()).unwrap().scale(half);
            let p1 = o1.sub(&o1.adjoint()).unwrap().scale(mi_half);
            let x2 = o2.add(&o2.adjoint()).unwrap().scale(half);
            let p2 = o2.sub(&o2.adjoint()).unwrap().scale(mi_half);
            let zero_h = identity(&space).sub(&identity(&space)).unwrap();
            let joint = o1.add(&o2.adjoint().scale(C64::new(0.0, -1.0))).unwrap();
            let coherent = LindbladModel::new(zero_h.clone(), vec![(lambda, joint)]).unwrap();
            let split = LindbladModel::new(
                zero_h,
                vec![
                    (lambda, x1.add(&x2.scale(C64::new(0.0, -1.0))).unwrap()),
                    (lambda, p1.add(&p2.scale(C64::new(0.0, -1.0))).unwrap()),
                ],
            )
            .unwrap();
            let s_coh = superoperator_matrix(&coherent).unwrap();
            let s_split = superoperator_matrix(&split).unwrap();
            let diff = (&s_coh - &s_split).mapv(|z| z.norm_sqr()).sum().sqrt();
            assert!(
                diff > 0.01 * lambda,
                "superoperators nearly coincide (diff {diff:.3e}) at seed {seed}"
            );
        }
    }

    #[test]
    fn trajectory_csv_has_labeled_columns() {
        let space = FockSpace::new(&[2]).unwrap();
        let h = identity(&space).sub(&identity(&space)).unwrap();
        let model =
            LindbladModel::new(h, vec![(1.0, mode_annihilation(&space, 1).unwrap())]).unwrap();
        let rho0 = DensityMatrix::fock_state(&space, &[1]).unwrap();
        let traj = evolve(&model, &rho0, 0.1, 0.01).unwrap();
        let n = mode_number(&space, 1).unwrap();
        let mut buf = Vec::new();
        traj.write_expectations_csv(&[("n1", &n)], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "time,n1_re,n1_im");
        assert_eq!(lines.count(), traj.len());
    }
}
