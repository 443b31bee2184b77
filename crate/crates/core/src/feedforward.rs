// Copyright 2026 the nonrecip authors
// SPDX-License-Identifier: Apache-2.0

//! Continuous weak measurement with feedforward, and its equivalence to the
//! directional Lindblad model.
//!
//! The protocol: a Hermitian system-1 observable A₁ is monitored continuously
//! at rate k, producing the record increment dI = √k·⟨A₁⟩dt + dW per step;
//! the record is immediately (zero delay) fed forward as a force on system 2
//! through the superoperator ℳρ = −i[√γ_ff·F₂, ρ]. Two views are provided:
//!
//! * **Conditional** — [`conditional_step`] / [`simulate_trajectory`]: the
//!   stochastic conditional state given one measurement record, stepped by
//!   Euler–Maruyama with Gaussian Wiener increments from a seeded
//!   counter-based generator (identical seed ⟹ identical record).
//! * **Unconditional** — [`unconditional_generator`]: the deterministic
//!   average over records. The record-dependent ⟨A₁⟩ terms cancel exactly
//!   between the forward drive and the measurement–noise correlation,
//!   leaving a linear Lindblad-form generator; linearity is *verified*
//!   ([`FeedforwardGenerator::linearity_defect`]), not simplified away.
//!
//! The payoff is [`equivalence_parameters`]: with λ = √(k·γ_ff)/2 and
//! η = √(k/(4γ_ff)) the unconditional generator *equals* the fully
//! directional coupling model of
//! [`build_nonreciprocal`](crate::lindblad::build_nonreciprocal) — the
//! measured system evolves as if alone and drives the forced one. Since the
//! protocol uses only local operations and a classical signal, that
//! directional model can never entangle the two sides; the entanglement
//! diagnostics build on exactly this identification.

use std::io::Write as IoWrite;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::fock::{Bipartition, FockOperator, FockSpace};
use crate::lindblad::{
    build_nonreciprocal, dissipator_matrix, DensityMatrix, InfluenceDirection, NonreciprocalModel,
    NonreciprocalVariant, MAX_SAMPLES, MAX_STEPS, MAX_SUPEROP_DIM,
};
use crate::linalg::{pairwise_sum, vec_col};
use crate::{Error, Result, C64};

/// Hermiticity gate for the measured observable and the feedforward force.
pub const OBSERVABLE_HERMITICITY_TOL: f64 = 1e-12;

/// Step-size guard: both k·dt and γ_ff·dt must stay below this.
pub const STEP_GUARD: f64 = 0.01;

fn czero() -> C64 {
    C64::new(0.0, 0.0)
}

fn trace(m: &Array2<C64>) -> C64 {
    m.diag().iter().fold(czero(), |acc, z| acc + z)
}

// ---------------------------------------------------------------------------
// Protocol specification
// ---------------------------------------------------------------------------

/// The measurement-plus-feedforward protocol parameters.
///
/// `a1` (the monitored observable) must be Hermitian and local to a proper
/// subset of the modes; that subset *defines* subsystem 1, and the
/// feedforward force `f2` must be Hermitian and supported on the complement.
/// Rates are non-negative, the step positive, and the seed fixes every
/// Wiener increment of every trajectory.
#[derive(Debug, Clone)]
pub struct FeedforwardSpec {
    a1: FockOperator,
    f2: FockOperator,
    part: Bipartition,
    k: f64,
    gamma_ff: f64,
    dt: f64,
    seed: u64,
}

impl FeedforwardSpec {
    /// Validate and assemble a protocol specification.
    pub fn new(
        a1: &FockOperator,
        f2: &FockOperator,
        k: f64,
        gamma_ff: f64,
        dt: f64,
        seed: u64,
    ) -> Result<Self> {
        if a1.space() != f2.space() {
            return Err(Error::InvalidArgument(
                "measured observable and feedforward force live on different spaces".into(),
            ));
        }
        let space = a1.space().clone();
        for (name, op) in [("A₁", a1), ("F₂", f2)] {
            let defect = op.hermiticity_defect();
            if defect > OBSERVABLE_HERMITICITY_TOL {
                return Err(Error::InvalidArgument(format!(
                    "{name} is not Hermitian (defect {defect:.3e})"
                )));
            }
        }
        for (name, v) in [("k", k), ("gamma_ff", gamma_ff)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be non-negative and finite, got {v}"
                )));
            }
        }
        if !dt.is_finite() || dt <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "dt must be positive and finite, got {dt}"
            )));
        }
        let s1 = a1.support()?;
        if s1.is_empty() {
            return Err(Error::InvalidCoupling(
                "A₁ acts on no mode (scalar observables cannot anchor subsystem 1)".into(),
            ));
        }
        let s2: Vec<usize> = (1..=space.num_modes())
            .filter(|m| !s1.contains(m))
            .collect();
        if s2.is_empty() {
            return Err(Error::InvalidCoupling(
                "A₁ touches every mode; no modes remain for subsystem 2".into(),
            ));
        }
        let f2_support = f2.support()?;
        if !f2.is_local_to(&s2)? || f2_support.iter().any(|m| s1.contains(m)) {
            return Err(Error::InvalidCoupling(format!(
                "F₂ acts on subsystem-1 modes {s1:?} (its support is {f2_support:?})"
            )));
        }
        let part = Bipartition::new(&space, &s1, &s2)?;
        Ok(FeedforwardSpec {
            a1: a1.clone(),
            f2: f2.clone(),
            part,
            k,
            gamma_ff,
            dt,
            seed,
        })
    }

    /// The monitored observable A₁.
    pub fn a1(&self) -> &FockOperator {
        &self.a1
    }

    /// The feedforward force F₂.
    pub fn f2(&self) -> &FockOperator {
        &self.f2
    }

    /// The subsystem split inferred from A₁'s support.
    pub fn bipartition(&self) -> &Bipartition {
        &self.part
    }

    /// Measurement rate k.
    pub fn k(&self) -> f64 {
        self.k
    }

    /// Feedforward rate γ_ff.
    pub fn gamma_ff(&self) -> f64 {
        self.gamma_ff
    }

    /// Integration step dt.
    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Master seed for the Wiener increments.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The underlying space.
    pub fn space(&self) -> &FockSpace {
        self.a1.space()
    }
}

// ---------------------------------------------------------------------------
// Conditional (stochastic) evolution
// ---------------------------------------------------------------------------

/// Cached matrices for repeated conditional steps.
struct Stepper {
    k: f64,
    gamma_ff: f64,
    a1: Array2<C64>,
    /// √γ_ff·F₂, the generator of the feedforward kick ℳρ = −i[√γ_ff·F₂, ρ].
    f2_scaled: Array2<C64>,
}

impl Stepper {
    fn new(spec: &FeedforwardSpec) -> Self {
        Stepper {
            k: spec.k,
            gamma_ff: spec.gamma_ff,
            a1: spec.a1.matrix().clone(),
            f2_scaled: spec.f2.matrix().mapv(|z| z * spec.gamma_ff.sqrt()),
        }
    }

    fn a1_mean(&self, rho: &Array2<C64>) -> f64 {
        // tr(A₁ρ) is real for Hermitian A₁ and ρ.
        let mut acc = czero();
        for i in 0..rho.nrows() {
            for j in 0..rho.ncols() {
                acc += self.a1[[i, j]] * rho[[j, i]];
            }
        }
        acc.re
    }

    /// ℳρ = −i[√γ_ff·F₂, ρ].
    fn kick(&self, rho: &Array2<C64>) -> Array2<C64> {
        let comm = self.f2_scaled.dot(rho) - rho.dot(&self.f2_scaled);
        comm.mapv(|z| C64::new(z.im, -z.re))
    }

    /// One conditional step of length `h` with Wiener increment `dw`;
    /// returns the renormalized state and the record increment dI.
    fn step(&self, rho: &Array2<C64>, h: f64, dw: f64) -> Result<(Array2<C64>, f64)> {
        let mean = self.a1_mean(rho);
        // Measurement update: (k/4)𝒟[A₁]ρ·h + (√k/2){A₁ − ⟨A₁⟩, ρ}·dW.
        let mut next = rho.clone();
        if self.k > 0.0 {
            let diss = dissipator_matrix(&self.a1, rho);
            let innovation =
                self.a1.dot(rho) + rho.dot(&self.a1) - rho.mapv(|z| z * (2.0 * mean));
            next = next
                + diss.mapv(|z| z * (self.k / 4.0 * h))
                + innovation.mapv(|z| z * (self.k.sqrt() / 2.0 * dw));
        }
        // Record increment, then the feedforward propagator expanded to the
        // Ito order: 1 + dI·ℳ + (h/2)·ℳ² applied to the measurement-updated
        // state (dI² = h at this order, hence the deterministic ℳ² term).
        let di = self.k.sqrt() * mean * h + dw;
        if self.gamma_ff > 0.0 {
            let m1 = self.kick(&next);
            let m2 = self.kick(&m1);
            next = next + m1.mapv(|z| z * di) + m2.mapv(|z| z * (h / 2.0));
        }
        // Renormalize (the conditional update preserves trace only to O(h))
        // and re-Hermitize.
        let tr = trace(&next);
        if !tr.re.is_finite() || tr.norm() < 0.1 {
            return Err(Error::IntegrationFailure(format!(
                "conditional state lost normalization (trace {tr})"
            )));
        }
        let next = next.mapv(|z| z / tr);
        let nextd = crate::linalg::dagger(&next.view());
        Ok(((&next + &nextd).mapv(|z| z * 0.5), di))
    }
}

/// Apply one conditional measurement-plus-feedforward step of length
/// `spec.dt` with the given Wiener increment.
///
/// The measurement update dρ = (k/4)𝒟[A₁]ρ·dt + (√k/2){A₁−⟨A₁⟩, ρ}·dW is
/// applied first; the feedforward propagator — expanded to Ito order as
/// 1 + dI·ℳ + ½ℳ²dt with dI = √k⟨A₁⟩dt + dW and ℳρ = −i[√γ_ff·F₂, ρ] —
/// acts on the updated state; the trace is then renormalized to 1. The
/// returned state is exactly unit-trace and Hermitian but, like any
/// finite-step conditional state, positive only to O(dt).
pub fn conditional_step(
    rho: &DensityMatrix,
    spec: &FeedforwardSpec,
    dw: f64,
) -> Result<DensityMatrix> {
    if rho.space() != spec.space() {
        return Err(Error::InvalidArgument(
            "state lives on a different space than the protocol".into(),
        ));
    }
    if !dw.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "Wiener increment must be finite, got {dw}"
        )));
    }
    let (next, _di) = Stepper::new(spec).step(rho.matrix(), spec.dt, dw)?;
    DensityMatrix::new_conditional(spec.space(), next)
}

/// One simulated measurement record and the conditional state it produces.
///
/// All per-step arrays share the same length N (the number of steps):
/// `times[n]` is the *start* of step n, `a1_expectations[n]` and
/// `f2_expectations[n]` are conditional expectations in the state at that
/// time, and `increments[n] = √k·a1_expectations[n]·dt + dW_n` is the record
/// gathered during the step. The Wiener stream is reproducible from the
/// spec's seed.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    times: Vec<f64>,
    increments: Vec<f64>,
    a1_expectations: Vec<f64>,
    f2_expectations: Vec<f64>,
    final_state: DensityMatrix,
}

impl TrajectoryRecord {
    /// Step-start times (length = number of steps).
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Record increments dI per step.
    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    /// Conditional ⟨A₁⟩ at each step start.
    pub fn a1_expectations(&self) -> &[f64] {
        &self.a1_expectations
    }

    /// Conditional ⟨F₂⟩ at each step start.
    pub fn f2_expectations(&self) -> &[f64] {
        &self.f2_expectations
    }

    /// The conditional state at the end of the run.
    pub fn final_state(&self) -> &DensityMatrix {
        &self.final_state
    }

    /// Number of steps.
    pub fn len(&self) -> usize {
        self.times.len()
    }

    /// True when the record holds no steps.
    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Write the record as CSV with columns `time,dI,A1,F2`.
    pub fn write_csv<W: IoWrite>(&self, out: &mut W) -> Result<()> {
        let io_err = |e: std::io::Error| Error::Serialization(format!("writing CSV: {e}"));
        writeln!(out, "time,dI,A1,F2").map_err(io_err)?;
        for n in 0..self.times.len() {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                self.times[n], self.increments[n], self.a1_expectations[n],
                self.f2_expectations[n]
            )
            .map_err(io_err)?;
        }
        Ok(())
    }
}

fn check_guards(spec: &FeedforwardSpec, t_final: f64) -> Result<usize> {
    if spec.k * spec.dt >= STEP_GUARD {
        return Err(Error::StepSize(format!(
            "k·dt = {:.3e} violates the bound k·dt < {STEP_GUARD}",
            spec.k * spec.dt
        )));
    }
    if spec.gamma_ff * spec.dt >= STEP_GUARD {
        return Err(Error::StepSize(format!(
            "γ_ff·dt = {:.3e} violates the bound γ_ff·dt < {STEP_GUARD}",
            spec.gamma_ff * spec.dt
        )));
    }
    if !t_final.is_finite() || t_final <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "t_final must be positive and finite, got {t_final}"
        )));
    }
    let n_steps = (t_final / spec.dt).ceil() as usize;
    let n_steps = n_steps.max(1);
    if n_steps > MAX_STEPS {
        return Err(Error::InvalidArgument(format!(
            "t_final/dt = {n_steps} steps exceeds the cap {MAX_STEPS}"
        )));
    }
    Ok(n_steps)
}

/// Run one Euler–Maruyama chain on the given sub-stream of the seeded
/// generator, invoking `visit(n, tₙ, ρₙ)` at every time point n = 0..=N.
fn run_chain<F: FnMut(usize, f64, &Array2<C64>)>(
    spec: &FeedforwardSpec,
    rho0: &DensityMatrix,
    t_final: f64,
    stream: u64,
    visit: &mut F,
) -> Result<TrajectoryRecord> {
    if rho0.space() != spec.space() {
        return Err(Error::InvalidArgument(
            "initial state lives on a different space than the protocol".into(),
        ));
    }
    let n_steps = check_guards(spec, t_final)?;
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
    rng.set_stream(stream);
    let stepper = Stepper::new(spec);
    let f2_matrix = spec.f2.matrix();
    let f2_mean = |rho: &Array2<C64>| -> f64 {
        let mut acc = czero();
        for i in 0..rho.nrows() {
            for j in 0..rho.ncols() {
                acc += f2_matrix[[i, j]] * rho[[j, i]];
            }
        }
        acc.re
    };

    let mut rho = rho0.matrix().clone();
    let mut times = Vec::with_capacity(n_steps);
    let mut increments = Vec::with_capacity(n_steps);
    let mut a1s = Vec::with_capacity(n_steps);
    let mut f2s = Vec::with_capacity(n_steps);
    visit(0, 0.0, &rho);
    for n in 0..n_steps {
        let t_start = n as f64 * spec.dt;
        // Clip the final step so the chain lands exactly on t_final; the
        // Wiener increment variance matches the clipped length.
        let h = if n + 1 == n_steps {
            t_final - t_start
        } else {
            spec.dt
        };
        let t_next = if n + 1 == n_steps {
            t_final
        } else {
            (n + 1) as f64 * spec.dt
        };
        times.push(t_start);
        a1s.push(stepper.a1_mean(&rho));
        f2s.push(f2_mean(&rho));
        let z: f64 = rng.sample(StandardNormal);
        let dw = z * h.sqrt();
        let (next, di) = stepper.step(&rho, h, dw)?;
        rho = next;
        increments.push(di);
        visit(n + 1, t_next, &rho);
    }
    let final_state = DensityMatrix::new_conditional(spec.space(), rho)?;
    Ok(TrajectoryRecord {
        times,
        increments,
        a1_expectations: a1s,
        f2_expectations: f2s,
        final_state,
    })
}

/// Simulate one conditional trajectory from the spec's seed (sub-stream 0).
///
/// Requires k·dt < 0.01 and γ_ff·dt < 0.01; the error names the violated
/// bound. The Wiener increments are Normal(0, dt) from the seeded
/// counter-based generator, so identical specs give bitwise-identical
/// records.
pub fn simulate_trajectory(
    spec: &FeedforwardSpec,
    rho0: &DensityMatrix,
    t_final: f64,
) -> Result<TrajectoryRecord> {
    run_chain(spec, rho0, t_final, 0, &mut |_, _, _| {})
}

// ---------------------------------------------------------------------------
// Unconditional (averaged) evolution
// ---------------------------------------------------------------------------

/// The deterministic generator obtained by averaging the conditional
/// evolution over all measurement records.
///
/// [`FeedforwardGenerator::apply`] evaluates the averaged equation in its
/// raw affine form,
///
///   (k/4)𝒟[A₁]ρ + √k·⟨A₁⟩·ℳρ + ½ℳ²ρ + ℳ[(√k/2){A₁ − ⟨A₁⟩, ρ}],
///
/// with ⟨A₁⟩ = tr(A₁ρ) recomputed from the argument each time. The two
/// ⟨A₁⟩-dependent pieces cancel identically, so the map is linear; that
/// cancellation is checked by [`FeedforwardGenerator::linearity_defect`]
/// rather than simplified away by hand.
#[derive(Debug, Clone)]
pub struct FeedforwardGenerator {
    spec: FeedforwardSpec,
}

/// Build the unconditional generator for a protocol.
pub fn unconditional_generator(spec: &FeedforwardSpec) -> FeedforwardGenerator {
    FeedforwardGenerator { spec: spec.clone() }
}

impl FeedforwardGenerator {
    /// The protocol this generator averages.
    pub fn spec(&self) -> &FeedforwardSpec {
        &self.spec
    }

    /// Apply the averaged generator to an arbitrary matrix.
    pub fn apply(&self, rho: &Array2<C64>) -> Array2<C64> {
        let spec = &self.spec;
        let a1 = spec.a1.matrix();
        let d = rho.nrows();
        let mut out = Array2::from_elem((d, d), czero());
        // Complex trace keeps the map linear on non-Hermitian arguments.
        let mut mean = czero();
        for i in 0..d {
            for j in 0..d {
                mean += a1[[i, j]] * rho[[j, i]];
            }
        }
        let kick = |m: &Array2<C64>| -> Array2<C64> {
            let f = spec.f2.matrix();
            let comm = f.dot(m) - m.dot(f);
            comm.mapv(|z| C64::new(z.im, -z.re) * spec.gamma_ff.sqrt())
        };
        if spec.k > 0.0 {
            out = out + dissipator_matrix(a1, rho).mapv(|z| z * (spec.k / 4.0));
        }
        if spec.gamma_ff > 0.0 {
            // √k⟨A₁⟩·ℳρ
            let m_rho = kick(rho);
            out = out + m_rho.mapv(|z| z * mean * spec.k.sqrt());
            // ½ℳ²ρ
            out = out + kick(&m_rho).mapv(|z| z * 0.5);
            // ℳ[(√k/2){A₁, ρ} − √k⟨A₁⟩ρ]
            if spec.k > 0.0 {
                let anti = a1.dot(rho) + rho.dot(a1);
                let inner = anti.mapv(|z| z * (spec.k.sqrt() / 2.0))
                    - rho.mapv(|z| z * mean * spec.k.sqrt());
                out = out + kick(&inner);
            }
        }
        out
    }

    /// Largest superposition defect ‖G(αρ₁+βρ₂) − αG(ρ₁) − βG(ρ₂)‖_max over
    /// `trials` random complex matrix pairs and coefficients. Rounding-level
    /// output certifies the ⟨A₁⟩ cancellation.
    pub fn linearity_defect(&self, trials: usize, seed: u64) -> f64 {
        let d = self.spec.space().dim();
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let rand_matrix = |rng: &mut ChaCha12Rng| {
            Array2::from_shape_fn((d, d), |_| {
                C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            })
        };
        let mut worst = 0.0_f64;
        for _ in 0..trials {
            let r1 = rand_matrix(&mut rng);
            let r2 = rand_matrix(&mut rng);
            let alpha = C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
            let beta = C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
            let combined = self.apply(&(r1.mapv(|z| z * alpha) + r2.mapv(|z| z * beta)));
            let separate = self.apply(&r1).mapv(|z| z * alpha) + self.apply(&r2).mapv(|z| z * beta);
            let defect = crate::linalg::norm_max(&(combined - separate).view());
            worst = worst.max(defect);
        }
        worst
    }

    /// The dense superoperator matrix (column-stacking convention), built by
    /// applying the generator to every matrix unit.
    pub fn superoperator_matrix(&self) -> Result<Array2<C64>> {
        let d = self.spec.space().dim();
        if d > MAX_SUPEROP_DIM {
            return Err(Error::InvalidArgument(format!(
                "space dimension {d} exceeds the dense-superoperator cap {MAX_SUPEROP_DIM}"
            )));
        }
        let mut sup = Array2::from_elem((d * d, d * d), czero());
        for b in 0..d {
            for a in 0..d {
                let mut unit = Array2::from_elem((d, d), czero());
                unit[[a, b]] = C64::new(1.0, 0.0);
                let col = vec_col(&self.apply(&unit).view());
                sup.column_mut(b * d + a).assign(&col);
            }
        }
        Ok(sup)
    }
}

/// The coupling parameters of the directional Lindblad model that the
/// unconditional feedforward evolution realizes:
/// λ = √(k·γ_ff)/2 and η = √(k/(4γ_ff)).
pub fn equivalence_parameters(k: f64, gamma_ff: f64) -> Result<(f64, f64)> {
    for (name, v) in [("k", k), ("gamma_ff", gamma_ff)] {
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "{name} must be positive and finite, got {v}"
            )));
        }
    }
    Ok(((k * gamma_ff).sqrt() / 2.0, (k / (4.0 * gamma_ff)).sqrt()))
}

/// The inverse identification: k = 4λη and γ_ff = λ/η.
pub fn measurement_parameters(lambda: f64, eta: f64) -> Result<(f64, f64)> {
    for (name, v) in [("lambda", lambda), ("eta", eta)] {
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "{name} must be positive and finite, got {v}"
            )));
        }
    }
    Ok((4.0 * lambda * eta, lambda / eta))
}

/// The directional Lindblad model equivalent to the protocol's unconditional
/// evolution: `build_nonreciprocal(A₁, F₂, λ, Directional{η, 1→2})` with the
/// parameters of [`equivalence_parameters`]. Requires k, γ_ff > 0.
pub fn equivalence_model(spec: &FeedforwardSpec) -> Result<NonreciprocalModel> {
    let (lambda, eta) = equivalence_parameters(spec.k, spec.gamma_ff)?;
    build_nonreciprocal(
        &spec.a1,
        &spec.f2,
        lambda,
        NonreciprocalVariant::Directional {
            eta,
            direction: InfluenceDirection::OneToTwo,
        },
    )
}

// ---------------------------------------------------------------------------
// Ensembles
// ---------------------------------------------------------------------------

/// Mean and standard error of one tracked observable over an ensemble.
#[derive(Debug, Clone, Serialize)]
pub struct ObservableSeries {
    /// Caller-supplied label.
    pub name: String,
    /// Sample times (shared across observables).
    pub times: Vec<f64>,
    /// Ensemble mean of the conditional expectation at each sample time.
    pub mean: Vec<f64>,
    /// Standard error of that mean (sample std / √N).
    pub stderr: Vec<f64>,
}

/// Ensemble-averaged observables of conditional trajectories.
#[derive(Debug, Clone, Serialize)]
pub struct EnsembleReport {
    /// Number of trajectories.
    pub n: usize,
    /// Integration step.
    pub dt: f64,
    /// One series per tracked observable.
    pub observables: Vec<ObservableSeries>,
}

impl EnsembleReport {
    /// Serialize the report as pretty-printed JSON.
    pub fn write_json<W: IoWrite>(&self, out: &mut W) -> Result<()> {
        serde_json::to_writer_pretty(out, self)
            .map_err(|e| Error::Serialization(format!("writing JSON: {e}")))
    }
}

/// Run `n_trajectories` independent conditional trajectories (sub-streams
/// 0..n of the spec's seed, executed in parallel) and return ensemble means
/// and standard errors of the tracked observables on a common grid of at
/// most [`MAX_SAMPLES`] sample times.
///
/// The reduction uses pairwise summation over the index-ordered trajectory
/// results, so reported means are independent of thread scheduling.
pub fn run_ensemble(
    spec: &FeedforwardSpec,
    rho0: &DensityMatrix,
    t_final: f64,
    n_trajectories: usize,
    observables: &[(&str, &FockOperator)],
) -> Result<EnsembleReport> {
    if n_trajectories == 0 {
        return Err(Error::InvalidArgument(
            "ensemble needs at least one trajectory".into(),
        ));
    }
    for (name, op) in observables {
        if op.space() != spec.space() {
            return Err(Error::InvalidArgument(format!(
                "observable {name} lives on a different space than the protocol"
            )));
        }
    }
    let n_steps = check_guards(spec, t_final)?;
    let stride = ((n_steps + MAX_SAMPLES - 2) / (MAX_SAMPLES - 1)).max(1);
    let sampled: Vec<usize> = (0..=n_steps)
        .filter(|&n| n % stride == 0 || n == n_steps)
        .collect();
    let sample_times: Vec<f64> = sampled
        .iter()
        .map(|&n| if n == n_steps { t_final } else { n as f64 * spec.dt })
        .collect();
    let n_samples = sampled.len();
    let n_obs = observables.len();

    // Each trajectory yields a flat row of observable values, sample-major.
    let rows: Vec<Vec<f64>> = (0..n_trajectories as u64)
        .into_par_iter()
        .map(|stream| -> Result<Vec<f64>> {
            let mut row = vec![0.0_f64; n_samples * n_obs];
            let mut cursor = 0usize;
            run_chain(spec, rho0, t_final, stream, &mut |n, _t, rho| {
                if n % stride == 0 || n == n_steps {
                    for (o, (_, op)) in observables.iter().enumerate() {
                        row[cursor * n_obs + o] = op.expectation(rho).re;
                    }
                    cursor += 1;
                }
            })?;
            debug_assert_eq!(cursor, n_samples);
            Ok(row)
        })
        .collect::<Result<_>>()?;

    let n = n_trajectories;
    let mut series = Vec::with_capacity(n_obs);
    let mut values = vec![0.0_f64; n];
    for (o, (name, _)) in observables.iter().enumerate() {
        let mut mean = Vec::with_capacity(n_samples);
        let mut stderr = Vec::with_capacity(n_samples);
        for s in 0..n_samples {
            for (j, row) in rows.iter().enumerate() {
                values[j] = row[s * n_obs + o];
            }
            let m = pairwise_sum(&values) / n as f64;
            let se = if n > 1 {
                let devs: Vec<f64> = values.iter().map(|v| (v - m) * (v - m)).collect();
                (pairwise_sum(&devs) / ((n - 1) as f64)).sqrt() / (n as f64).sqrt()
            } else {
                0.0
            };
            mean.push(m);
            stderr.push(se);
        }
        series.push(ObservableSeries {
            name: (*name).to_string(),
            times: sample_times.clone(),
            mean,
            stderr,
        });
    }
    Ok(EnsembleReport {
        n,
        dt: spec.dt,
        observables: series,
    })
}
