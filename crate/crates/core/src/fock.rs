// Copyright 2026 the nonrecip authors
// SPDX-License-Identifier: Apache-2.0

//! Truncated multi-mode Fock spaces and dense bosonic operator algebra.
//!
//! A [`FockSpace`] is a tensor product of single-mode spaces, each truncated
//! at a per-mode maximum occupation. Basis ordering is fixed: **mode 1
//! varies slowest**, so |n₁, n₂, …⟩ maps to the flat index
//! n₁·(d₂d₃…) + n₂·(d₃…) + …, with d_m the truncated mode dimension.
//!
//! Operators are dense complex matrices over the full product space. The
//! truncation shows up in the algebra exactly where it must: on a single
//! mode with maximum occupation N, the commutator [a, a†] equals the
//! identity everywhere except the top level, where it is 1 − (N+1) = −N,
//! because a† annihilates the highest retained state.

use ndarray::{Array1, Array2};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::linalg::{dagger, norm_max};
use crate::{Error, Result, C64};

/// Hermiticity tolerance used by [`FockOperator::is_hermitian`] and model
/// validation downstream.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Commutation tolerance for locality checks against number operators.
pub const LOCALITY_TOL: f64 = 1e-12;

/// Hard cap on the product-space dimension. Everything in this crate is
/// dense; past this size the Liouvillian-level algebra (dim²) stops being
/// tractable.
pub const MAX_DIMENSION: usize = 2048;

/// Hard cap on the number of modes.
pub const MAX_MODES: usize = 3;

fn czero() -> C64 {
    Complex::new(0.0, 0.0)
}

/// A truncated product of bosonic modes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FockSpace {
    /// Per-mode maximum occupation (cutoff); mode m keeps |0⟩ … |cutoff_m⟩.
    cutoffs: Vec<usize>,
}

impl FockSpace {
    /// Build a space from per-mode cutoffs (maximum retained occupation).
    pub fn new(cutoffs: &[usize]) -> Result<Self> {
        if cutoffs.is_empty() || cutoffs.len() > MAX_MODES {
            return Err(Error::InvalidArgument(format!(
                "need between 1 and {MAX_MODES} modes, got {}",
                cutoffs.len()
            )));
        }
        if cutoffs.iter().any(|&c| c == 0) {
            return Err(Error::InvalidArgument(
                "each mode needs cutoff >= 1 (at least two Fock levels)".into(),
            ));
        }
        let dim: usize = cutoffs.iter().map(|&c| c + 1).product();
        if dim > MAX_DIMENSION {
            return Err(Error::InvalidArgument(format!(
                "product-space dimension {dim} exceeds the dense-algebra cap {MAX_DIMENSION}"
            )));
        }
        Ok(FockSpace {
            cutoffs: cutoffs.to_vec(),
        })
    }

    /// Number of modes.
    pub fn num_modes(&self) -> usize {
        self.cutoffs.len()
    }

    /// Maximum occupation of a (1-based) mode.
    pub fn cutoff(&self, mode: usize) -> Result<usize> {
        self.check_mode(mode)?;
        Ok(self.cutoffs[mode - 1])
    }

    /// Truncated dimension of each mode (cutoff + 1).
    pub fn mode_dims(&self) -> Vec<usize> {
        self.cutoffs.iter().map(|&c| c + 1).collect()
    }

    /// Total product-space dimension.
    pub fn dim(&self) -> usize {
        self.cutoffs.iter().map(|&c| c + 1).product()
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode == 0 || mode > self.num_modes() {
            return Err(Error::InvalidArgument(format!(
                "mode index {mode} out of range 1..={}",
                self.num_modes()
            )));
        }
        Ok(())
    }

    /// Flat index of |n₁, n₂, …⟩ (mode 1 slowest).
    pub fn index_of(&self, occupations: &[usize]) -> Result<usize> {
        if occupations.len() != self.num_modes() {
            return Err(Error::InvalidArgument(format!(
                "expected {} occupations, got {}",
                self.num_modes(),
                occupations.len()
            )));
        }
        let mut idx = 0;
        for (m, (&n, &c)) in occupations.iter().zip(&self.cutoffs).enumerate() {
            if n > c {
                return Err(Error::InvalidArgument(format!(
                    "occupation {n} exceeds cutoff {c} on mode {}",
                    m + 1
                )));
            }
            idx = idx * (c + 1) + n;
        }
        Ok(idx)
    }

    /// Occupations |n₁, n₂, …⟩ of a flat basis index.
    pub fn occupations(&self, mut index: usize) -> Vec<usize> {
        let mut occ = vec![0; self.num_modes()];
        for m in (0..self.num_modes()).rev() {
            let d = self.cutoffs[m] + 1;
            occ[m] = index % d;
            index /= d;
        }
        occ
    }

    /// Basis vector |n₁, n₂, …⟩.
    pub fn basis_state(&self, occupations: &[usize]) -> Result<Array1<C64>> {
        let idx = self.index_of(occupations)?;
        let mut v = Array1::from_elem(self.dim(), czero());
        v[idx] = Complex::new(1.0, 0.0);
        Ok(v)
    }

    /// The vacuum |0, 0, …⟩.
    pub fn vacuum(&self) -> Array1<C64> {
        let mut v = Array1::from_elem(self.dim(), czero());
        v[0] = Complex::new(1.0, 0.0);
        v
    }
}

/// A dense operator over a [`FockSpace`].
#[derive(Debug, Clone)]
pub struct FockOperator {
    space: FockSpace,
    matrix: Array2<C64>,
}

/// Single-mode annihilation matrix at truncated dimension d: a|n⟩ = √n|n−1⟩.
fn annihilation_matrix(d: usize) -> Array2<C64> {
    let mut a = Array2::from_elem((d, d), czero());
    for n in 1..d {
        a[[n - 1, n]] = Complex::new((n as f64).sqrt(), 0.0);
    }
    a
}

/// Place a single-mode matrix on `mode`, identity elsewhere
/// (mode 1 varies slowest, matching [`FockSpace::index_of`]).
fn place_on_mode(space: &FockSpace, mode: usize, op: &Array2<C64>) -> Array2<C64> {
    use ndarray::linalg::kron;
    let dims = space.mode_dims();
    let mut full: Array2<C64> = Array2::eye(1);
    for (m, &d) in dims.iter().enumerate() {
        let factor = if m + 1 == mode {
            op.clone()
        } else {
            Array2::eye(d)
        };
        full = kron(&full, &factor);
    }
    full
}

/// Annihilation operator a_mode on the product space.
pub fn mode_annihilation(space: &FockSpace, mode: usize) -> Result<FockOperator> {
    space.check_mode(mode)?;
    let d = space.cutoffs[mode - 1] + 1;
    let matrix = place_on_mode(space, mode, &annihilation_matrix(d));
    Ok(FockOperator {
        space: space.clone(),
        matrix,
    })
}

/// Creation operator a†_mode.
pub fn mode_creation(space: &FockSpace, mode: usize) -> Result<FockOperator> {
    Ok(mode_annihilation(space, mode)?.adjoint())
}

/// Number operator a†a on `mode`.
pub fn mode_number(space: &FockSpace, mode: usize) -> Result<FockOperator> {
    let a = mode_annihilation(space, mode)?;
    a.adjoint().mul(&a)
}

/// Identity on the product space.
pub fn identity(space: &FockSpace) -> FockOperator {
    FockOperator {
        space: space.clone(),
        matrix: Array2::eye(space.dim()),
    }
}

/// Zero operator on the product space.
pub fn zero_operator(space: &FockSpace) -> FockOperator {
    FockOperator {
        space: space.clone(),
        matrix: Array2::from_elem((space.dim(), space.dim()), czero()),
    }
}

impl FockOperator {
    /// Wrap an explicit matrix, checking its shape against the space.
    pub fn from_matrix(space: &FockSpace, matrix: Array2<C64>) -> Result<Self> {
        let d = space.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::InvalidArgument(format!(
                "matrix is {}x{}, space dimension is {d}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(FockOperator {
            space: space.clone(),
            matrix,
        })
    }

    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Array2<C64> {
        self.matrix
    }

    fn check_same_space(&self, other: &FockOperator) -> Result<()> {
        if self.space != other.space {
            return Err(Error::InvalidArgument(
                "operators live on different Fock spaces".into(),
            ));
        }
        Ok(())
    }

    /// Hermitian adjoint.
    pub fn adjoint(&self) -> FockOperator {
        FockOperator {
            space: self.space.clone(),
            matrix: dagger(&self.matrix.view()),
        }
    }

    /// Operator product self·other.
    pub fn mul(&self, other: &FockOperator) -> Result<FockOperator> {
        self.check_same_space(other)?;
        Ok(FockOperator {
            space: self.space.clone(),
            matrix: self.matrix.dot(&other.matrix),
        })
    }

    /// Operator sum.
    pub fn add(&self, other: &FockOperator) -> Result<FockOperator> {
        self.check_same_space(other)?;
        Ok(FockOperator {
            space: self.space.clone(),
            matrix: &self.matrix + &other.matrix,
        })
    }

    /// Operator difference.
    pub fn sub(&self, other: &FockOperator) -> Result<FockOperator> {
        self.check_same_space(other)?;
        Ok(FockOperator {
            space: self.space.clone(),
            matrix: &self.matrix - &other.matrix,
        })
    }

    /// Scalar multiple.
    pub fn scale(&self, z: C64) -> FockOperator {
        FockOperator {
            space: self.space.clone(),
            matrix: self.matrix.mapv(|x| x * z),
        }
    }

    /// Commutator [self, other].
    pub fn commutator(&self, other: &FockOperator) -> Result<FockOperator> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    /// Max-entry distance to the adjoint; zero for exactly Hermitian.
    pub fn hermiticity_defect(&self) -> f64 {
        let diff = &self.matrix - &dagger(&self.matrix.view());
        norm_max(&diff.view())
    }

    /// Hermitian within [`HERMITICITY_TOL`]?
    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_defect() < HERMITICITY_TOL
    }

    /// tr(self · ρ) for a density matrix (or any operator) ρ.
    pub fn expectation(&self, rho: &Array2<C64>) -> C64 {
        // tr(A ρ) = Σ_ij A[i,j] ρ[j,i]
        let mut acc = czero();
        for i in 0..self.matrix.nrows() {
            for j in 0..self.matrix.ncols() {
                acc += self.matrix[[i, j]] * rho[[j, i]];
            }
        }
        acc
    }

    /// ⟨ψ|self|ψ⟩ for a pure state.
    pub fn matrix_element(&self, psi: &Array1<C64>) -> C64 {
        let applied = self.matrix.dot(psi);
        psi.iter()
            .zip(applied.iter())
            .map(|(b, a)| b.conj() * a)
            .fold(czero(), |acc, z| acc + z)
    }

    /// Does this operator act only on the given (1-based) modes?
    ///
    /// Checked the way the directional builders need it: commutation with
    /// the number operator of every *other* mode within [`LOCALITY_TOL`].
    pub fn is_local_to(&self, modes: &[usize]) -> Result<bool> {
        for m in 1..=self.space.num_modes() {
            if modes.contains(&m) {
                continue;
            }
            let n_m = mode_number(&self.space, m)?;
            let comm = self.commutator(&n_m)?;
            if norm_max(&comm.matrix.view()) >= LOCALITY_TOL {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// The (1-based) modes this operator acts on non-trivially.
    ///
    /// A mode lies outside the support when the operator commutes with both
    /// that mode's annihilation and creation operators; those two generate
    /// the whole single-mode matrix algebra, so commuting with both means
    /// the operator factors as `something ⊗ identity` there. This is sharper
    /// than [`FockOperator::is_local_to`], whose number-operator probe cannot
    /// see purely diagonal action (e.g. the support of n₁ is {1} here, while
    /// n₁ commutes with every other number operator).
    pub fn support(&self) -> Result<Vec<usize>> {
        let mut modes = Vec::new();
        for m in 1..=self.space.num_modes() {
            let a_m = mode_annihilation(&self.space, m)?;
            let with_a = self.commutator(&a_m)?;
            let with_adag = self.commutator(&a_m.adjoint())?;
            if norm_max(&with_a.matrix.view()) >= LOCALITY_TOL
                || norm_max(&with_adag.matrix.view()) >= LOCALITY_TOL
            {
                modes.push(m);
            }
        }
        Ok(modes)
    }
}

/// A two-subsystem split of the modes of a [`FockSpace`].
///
/// Both directional Lindblad builders and the entanglement diagnostics need
/// to know which modes belong to "system 1" and which to "system 2".
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bipartition {
    /// 1-based modes of subsystem 1.
    pub system1: Vec<usize>,
    /// 1-based modes of subsystem 2.
    pub system2: Vec<usize>,
}

impl Bipartition {
    /// Validate against a space: disjoint, non-empty, jointly exhaustive.
    pub fn new(space: &FockSpace, system1: &[usize], system2: &[usize]) -> Result<Self> {
        if system1.is_empty() || system2.is_empty() {
            return Err(Error::InvalidArgument(
                "both subsystems must contain at least one mode".into(),
            ));
        }
        let n = space.num_modes();
        let mut seen = vec![false; n];
        for &m in system1.iter().chain(system2) {
            if m == 0 || m > n {
                return Err(Error::InvalidArgument(format!(
                    "mode index {m} out of range 1..={n}"
                )));
            }
            if seen[m - 1] {
                return Err(Error::InvalidArgument(format!(
                    "mode {m} appears twice in the bipartition"
                )));
            }
            seen[m - 1] = true;
        }
        if seen.iter().any(|&s| !s) {
            return Err(Error::InvalidArgument(
                "bipartition must cover every mode of the space".into(),
            ));
        }
        Ok(Bipartition {
            system1: system1.to_vec(),
            system2: system2.to_vec(),
        })
    }

    /// Convenience split of a two-mode space into {1} | {2}.
    pub fn two_modes(space: &FockSpace) -> Result<Self> {
        if space.num_modes() != 2 {
            return Err(Error::InvalidArgument(
                "two_modes bipartition needs exactly two modes".into(),
            ));
        }
        Bipartition::new(space, &[1], &[2])
    }
}

/// Partial trace over subsystem 2: the reduced matrix on subsystem 1.
///
/// The reduced basis is mixed-radix over the kept modes *in the order the
/// bipartition lists them* (first listed mode slowest), matching the
/// convention of [`FockSpace`] itself, so the result lives naturally on
/// `FockSpace::new(&kept cutoffs)`.
pub fn partial_trace_keep_system1(
    space: &FockSpace,
    part: &Bipartition,
    rho: &Array2<C64>,
) -> Result<Array2<C64>> {
    partial_trace_impl(space, &part.system1, rho)
}

/// Partial trace over subsystem 1: the reduced matrix on subsystem 2.
pub fn partial_trace_keep_system2(
    space: &FockSpace,
    part: &Bipartition,
    rho: &Array2<C64>,
) -> Result<Array2<C64>> {
    partial_trace_impl(space, &part.system2, rho)
}

fn partial_trace_impl(
    space: &FockSpace,
    keep: &[usize],
    rho: &Array2<C64>,
) -> Result<Array2<C64>> {
    let d = space.dim();
    if rho.nrows() != d || rho.ncols() != d {
        return Err(Error::InvalidArgument(format!(
            "matrix is {}x{} but the space has dimension {d}",
            rho.nrows(),
            rho.ncols()
        )));
    }
    let dims = space.mode_dims();
    let dropped: Vec<usize> = (1..=space.num_modes())
        .filter(|m| !keep.contains(m))
        .collect();
    let kept_dim: usize = keep.iter().map(|&m| dims[m - 1]).product();
    // Mixed-radix sub-indices of every full basis index.
    let mut kidx = vec![0usize; d];
    let mut didx = vec![0usize; d];
    for (i, (ki, di)) in kidx.iter_mut().zip(didx.iter_mut()).enumerate() {
        let occ = space.occupations(i);
        *ki = mixed_radix(keep, &dims, &occ);
        *di = mixed_radix(&dropped, &dims, &occ);
    }
    let mut out = Array2::from_elem((kept_dim, kept_dim), czero());
    for i in 0..d {
        for j in 0..d {
            if didx[i] == didx[j] {
                out[[kidx[i], kidx[j]]] += rho[[i, j]];
            }
        }
    }
    Ok(out)
}

/// Flat index of `occ` restricted to `modes` (first listed mode slowest).
fn mixed_radix(modes: &[usize], dims: &[usize], occ: &[usize]) -> usize {
    let mut idx = 0;
    for &m in modes {
        idx = idx * dims[m - 1] + occ[m - 1];
    }
    idx
}
