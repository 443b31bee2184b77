// Copyright 2026 the nonrecip authors
// SPDX-License-Identifier: Apache-2.0

//! Shared dense linear algebra on complex matrices.
//!
//! Small systems (mode-space resolvents, N ≤ 16) go through a hand-rolled
//! partially-pivoted LU so the hot scattering path carries its own condition
//! estimate. Everything at Liouvillian scale (Hermitian spectra, SVD,
//! general eigendecompositions, large solves) is delegated to LAPACK via
//! `ndarray-linalg`.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use ndarray_linalg::{Eig, Eigh, Solve, UPLO, SVD};
use num_complex::Complex;

use crate::{Error, Result, C64};

/// Condition-number ceiling past which a solve is reported as singular.
pub const SINGULARITY_COND_LIMIT: f64 = 1e14;

fn zero() -> C64 {
    Complex::new(0.0, 0.0)
}

fn one() -> C64 {
    Complex::new(1.0, 0.0)
}

/// LU factors of a square complex matrix with partial pivoting (PA = LU).
#[derive(Debug, Clone)]
pub struct LuFactors {
    lu: Array2<C64>,
    pivots: Vec<usize>,
}

/// Factor `a` with partial pivoting. Fails on exact singularity.
pub fn lu_factor(a: &ArrayView2<C64>) -> Result<LuFactors> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::InvalidArgument(format!(
            "LU factorization needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let mut lu = a.to_owned();
    let mut pivots = Vec::with_capacity(n);
    for k in 0..n {
        // Select the largest remaining pivot in column k.
        let mut p = k;
        let mut best = lu[[k, k]].norm();
        for i in (k + 1)..n {
            let v = lu[[i, k]].norm();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best == 0.0 {
            return Err(Error::NumericalSingularity {
                condition: f64::INFINITY,
                context: format!("zero pivot at elimination step {k}"),
            });
        }
        if p != k {
            for j in 0..n {
                let tmp = lu[[k, j]];
                lu[[k, j]] = lu[[p, j]];
                lu[[p, j]] = tmp;
            }
        }
        pivots.push(p);
        let pivot = lu[[k, k]];
        for i in (k + 1)..n {
            let m = lu[[i, k]] / pivot;
            lu[[i, k]] = m;
            for j in (k + 1)..n {
                let sub = m * lu[[k, j]];
                lu[[i, j]] -= sub;
            }
        }
    }
    Ok(LuFactors { lu, pivots })
}

impl LuFactors {
    /// Solve `A x = b` for a single right-hand side.
    pub fn solve(&self, b: &Array1<C64>) -> Array1<C64> {
        let n = self.lu.nrows();
        let mut x = b.clone();
        for (k, &p) in self.pivots.iter().enumerate() {
            if p != k {
                x.swap(k, p);
            }
        }
        // Forward substitution (unit lower triangle).
        for i in 1..n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= self.lu[[i, j]] * x[j];
            }
            x[i] = acc;
        }
        // Back substitution.
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in (i + 1)..n {
                acc -= self.lu[[i, j]] * x[j];
            }
            x[i] = acc / self.lu[[i, i]];
        }
        x
    }

    /// Explicit inverse, column by column.
    pub fn inverse(&self) -> Array2<C64> {
        let n = self.lu.nrows();
        let mut inv = Array2::from_elem((n, n), zero());
        for j in 0..n {
            let mut e = Array1::from_elem(n, zero());
            e[j] = one();
            let col = self.solve(&e);
            inv.column_mut(j).assign(&col);
        }
        inv
    }
}

/// Maximum absolute column sum (the induced 1-norm).
pub fn norm_1(a: &ArrayView2<C64>) -> f64 {
    a.axis_iter(Axis(1))
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Largest entry magnitude.
pub fn norm_max(a: &ArrayView2<C64>) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Invert a small matrix, reporting the 1-norm condition number.
///
/// Returns `Err(NumericalSingularity)` when κ₁(A) = ‖A‖₁‖A⁻¹‖₁ exceeds
/// [`SINGULARITY_COND_LIMIT`].
pub fn invert_with_condition(a: &ArrayView2<C64>) -> Result<(Array2<C64>, f64)> {
    let factors = lu_factor(a)?;
    let inv = factors.inverse();
    let cond = norm_1(a) * norm_1(&inv.view());
    if !cond.is_finite() || cond > SINGULARITY_COND_LIMIT {
        return Err(Error::NumericalSingularity {
            condition: cond,
            context: "matrix inversion".into(),
        });
    }
    Ok((inv, cond))
}

/// Eigenvalues and eigenvectors of a Hermitian matrix (ascending order),
/// with eigenvectors in the **columns** of the returned matrix.
///
/// ndarray-linalg 0.16 hands a row-major buffer to column-major LAPACK, so
/// for complex Hermitian input the eigenvectors come back conjugated; we
/// undo that here and pin the `H v_k = w_k v_k` convention with a test.
pub fn eigh(a: &Array2<C64>) -> Result<(Array1<f64>, Array2<C64>)> {
    let (w, v) = a
        .eigh(UPLO::Lower)
        .map_err(|e| Error::NumericalSingularity {
            condition: f64::NAN,
            context: format!("Hermitian eigendecomposition failed: {e}"),
        })?;
    Ok((w, v.mapv(|z| z.conj())))
}

/// Eigenvalues of a Hermitian matrix only (ascending order).
pub fn eigvalsh(a: &Array2<C64>) -> Result<Array1<f64>> {
    Ok(eigh(a)?.0)
}

/// General (non-Hermitian) eigendecomposition: A V = V diag(w).
pub fn eig(a: &Array2<C64>) -> Result<(Array1<C64>, Array2<C64>)> {
    a.eig().map_err(|e| Error::NumericalSingularity {
        condition: f64::NAN,
        context: format!("eigendecomposition failed: {e}"),
    })
}

/// Full singular value decomposition A = U diag(s) V†.
pub fn svd(a: &Array2<C64>) -> Result<(Array2<C64>, Array1<f64>, Array2<C64>)> {
    let (u, s, vt) = a.svd(true, true).map_err(|e| Error::NumericalSingularity {
        condition: f64::NAN,
        context: format!("SVD failed: {e}"),
    })?;
    Ok((u.expect("requested U"), s, vt.expect("requested V^H")))
}

/// LAPACK-backed linear solve for a single right-hand side.
pub fn solve(a: &Array2<C64>, b: &Array1<C64>) -> Result<Array1<C64>> {
    a.solve(b).map_err(|e| Error::NumericalSingularity {
        condition: f64::NAN,
        context: format!("linear solve failed: {e}"),
    })
}

/// Conjugate transpose.
pub fn dagger(a: &ArrayView2<C64>) -> Array2<C64> {
    let mut out = Array2::from_elem((a.ncols(), a.nrows()), zero());
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            out[[j, i]] = a[[i, j]].conj();
        }
    }
    out
}

/// Column-stacking vectorization: vec(ρ)[i + n·j] = ρ[i, j].
pub fn vec_col(a: &ArrayView2<C64>) -> Array1<C64> {
    let n = a.nrows();
    let mut v = Array1::from_elem(n * a.ncols(), zero());
    for j in 0..a.ncols() {
        for i in 0..n {
            v[i + n * j] = a[[i, j]];
        }
    }
    v
}

/// Inverse of [`vec_col`] for square matrices.
pub fn unvec_col(v: &Array1<C64>, n: usize) -> Array2<C64> {
    assert_eq!(v.len(), n * n, "vector length must be n^2");
    let mut a = Array2::from_elem((n, n), zero());
    for j in 0..n {
        for i in 0..n {
            a[[i, j]] = v[i + n * j];
        }
    }
    a
}

/// Matrix exponential by scaling and squaring with a diagonal Padé(6,6)
/// approximant. Accurate to machine precision once the scaled norm is ≲ 0.5,
/// which the scaling step guarantees.
pub fn expm(a: &ArrayView2<C64>) -> Result<Array2<C64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::InvalidArgument(
            "matrix exponential needs a square matrix".into(),
        ));
    }
    let norm = norm_1(a);
    let s = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scale = 2.0f64.powi(-s);
    let m = a.mapv(|z| z * scale);

    // Padé(6,6): N(m) ≈ Σ c_k m^k, D(m) = N(-m), exp(m) ≈ D⁻¹N.
    let c: [f64; 7] = [
        1.0,
        0.5,
        5.0 / 44.0,
        1.0 / 66.0,
        1.0 / 792.0,
        1.0 / 15840.0,
        1.0 / 665280.0,
    ];
    let eye = Array2::<C64>::eye(n);
    let mut term = eye.clone();
    let mut num = Array2::from_elem((n, n), zero());
    let mut den = Array2::from_elem((n, n), zero());
    for (k, &ck) in c.iter().enumerate() {
        if k > 0 {
            term = term.dot(&m);
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        num = num + term.mapv(|z| z * ck);
        den = den + term.mapv(|z| z * (ck * sign));
    }
    // Solve den · X = num column by column via LAPACK.
    let mut x = Array2::from_elem((n, n), zero());
    for j in 0..n {
        let col = solve(&den, &num.column(j).to_owned())?;
        x.column_mut(j).assign(&col);
    }
    // Undo the scaling by repeated squaring.
    for _ in 0..s {
        x = x.dot(&x);
    }
    Ok(x)
}

/// Pairwise (cascade) summation, accurate to O(log n) rounding error.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
        }
    }
}

/// Frobenius norm.
pub fn norm_fro(a: &ArrayView2<C64>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Spectral (operator 2-) norm via singular values.
pub fn norm_2(a: &Array2<C64>) -> Result<f64> {
    let (_, s, _) = a.svd(false, false).map_err(|e| Error::NumericalSingularity {
        condition: f64::NAN,
        context: format!("SVD failed: {e}"),
    })?;
    Ok(s.iter().copied().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn c(re: f64, im: f64) -> C64 {
        Complex::new(re, im)
    }

    #[test]
    fn lu_inverse_matches_known_2x2() {
        let a = array![[c(1.0, 0.0), c(2.0, 0.0)], [c(3.0, 0.0), c(4.0, 0.0)]];
        let (inv, cond) = invert_with_condition(&a.view()).unwrap();
        let expected = array![[c(-2.0, 0.0), c(1.0, 0.0)], [c(1.5, 0.0), c(-0.5, 0.0)]];
        assert!(norm_max(&(&inv - &expected).view()) < 1e-14);
        assert!(cond > 1.0);
    }

    #[test]
    fn lu_solve_recovers_random_complex_system() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
        let n = 12;
        let a = Array2::from_shape_fn((n, n), |_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
        let x_true = Array1::from_shape_fn(n, |_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
        let b = a.dot(&x_true);
        let x = lu_factor(&a.view()).unwrap().solve(&b);
        assert!(
            (&x - &x_true).iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-10,
            "LU solve residual too large"
        );
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = array![[c(1.0, 0.0), c(2.0, 0.0)], [c(2.0, 0.0), c(4.0, 0.0)]];
        assert!(matches!(
            invert_with_condition(&a.view()),
            Err(Error::NumericalSingularity { .. })
        ));
    }

    #[test]
    fn eigh_diagonalizes_pauli_x() {
        let a = array![[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]];
        let (w, _) = eigh(&a).unwrap();
        assert_abs_diff_eq!(w[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(w[1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn svd_singular_values_of_diagonal() {
        let a = array![[c(3.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, 4.0)]];
        let (_, s, _) = svd(&a).unwrap();
        assert_abs_diff_eq!(s[0], 4.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s[1], 3.0, epsilon = 1e-14);
    }

    #[test]
    fn general_eig_finds_rotation_spectrum() {
        // i σ_y has eigenvalues ±i ... rotated: [[0, 1], [-1, 0]] has ±i.
        let a = array![[c(0.0, 0.0), c(1.0, 0.0)], [c(-1.0, 0.0), c(0.0, 0.0)]];
        let (w, _) = eig(&a).unwrap();
        let mut ims: Vec<f64> = w.iter().map(|z| z.im).collect();
        ims.sort_by(f64::total_cmp);
        assert_abs_diff_eq!(ims[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(ims[1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn expm_of_generator_rotates() {
        // exp([[0, θ], [-θ, 0]]) is a rotation by θ.
        let th = 0.3;
        let a = array![[c(0.0, 0.0), c(th, 0.0)], [c(-th, 0.0), c(0.0, 0.0)]];
        let e = expm(&a.view()).unwrap();
        assert_abs_diff_eq!(e[[0, 0]].re, th.cos(), epsilon = 1e-13);
        assert_abs_diff_eq!(e[[0, 1]].re, th.sin(), epsilon = 1e-13);
        assert_abs_diff_eq!(e[[1, 0]].re, -th.sin(), epsilon = 1e-13);
    }

    #[test]
    fn eigh_eigenvectors_are_columns() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(11);
        let n = 6;
        let g = Array2::from_shape_fn((n, n), |_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
        let h = &g + &dagger(&g.view());
        let (w, v) = eigh(&h).unwrap();
        let hv = h.dot(&v);
        for k in 0..n {
            let resid = (&hv.column(k).to_owned() - &v.column(k).mapv(|z| z * w[k]))
                .iter()
                .map(|z| z.norm())
                .fold(0.0f64, f64::max);
            assert!(resid < 1e-12, "column {k} residual {resid:.3e}");
        }
    }

    #[test]
    fn eig_eigenvectors_are_columns() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(5);
        let n = 5;
        let a = Array2::from_shape_fn((n, n), |_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
        let (w, v) = eig(&a).unwrap();
        let av = a.dot(&v);
        for k in 0..n {
            let resid = (&av.column(k).to_owned() - &v.column(k).mapv(|z| z * w[k]))
                .iter()
                .map(|z| z.norm())
                .fold(0.0f64, f64::max);
            assert!(resid < 1e-12, "column {k} residual {resid:.3e}");
        }
    }

    #[test]
    fn svd_reconstructs_directly() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(6);
        let n = 5;
        let a = Array2::from_shape_fn((n, n), |_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
        let (u, s, vt) = svd(&a).unwrap();
        let sm = Array2::from_diag(&s.mapv(|x| c(x, 0.0)));
        let recon = u.dot(&sm).dot(&vt);
        assert!(norm_max(&(&recon - &a).view()) < 1e-13);
    }

    #[test]
    fn expm_matches_eig_route_for_random_hermitian_generator() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(11);
        let n = 6;
        let g = Array2::from_shape_fn((n, n), |_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
        let h = &g + &dagger(&g.view()); // Hermitian
        let minus_ih = h.mapv(|z| z * c(0.0, -1.0));
        let u = expm(&minus_ih.view()).unwrap();
        // Independent route: diagonalize H, exponentiate eigenvalues.
        let (w, v) = eigh(&h).unwrap();
        let phases = Array2::from_diag(&w.mapv(|x| Complex::from_polar(1.0, -x)));
        let u_ref = v.dot(&phases).dot(&dagger(&v.view()));
        let err = norm_max(&(&u - &u_ref).view());
        assert!(err < 1e-12, "expm vs eig route differ by {err:.3e}");
    }

    #[test]
    fn vec_col_roundtrip_and_kron_identity() {
        use ndarray::linalg::kron;
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(3);
        let n = 4;
        let mk = |rng: &mut rand_chacha::ChaCha12Rng| {
            Array2::from_shape_fn((n, n), |_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        };
        let a = mk(&mut rng);
        let b = mk(&mut rng);
        let x = mk(&mut rng);
        // vec(A X B) = (Bᵀ ⊗ A) vec(X) for column stacking.
        let lhs = vec_col(&a.dot(&x).dot(&b).view());
        let rhs = kron(&b.t().to_owned(), &a).dot(&vec_col(&x.view()));
        assert!((&lhs - &rhs).iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-12);
        let back = unvec_col(&vec_col(&x.view()), n);
        assert!(norm_max(&(&back - &x).view()) == 0.0);
    }

    #[test]
    fn pairwise_sum_matches_naive_on_benign_data() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64).sin()).collect();
        let naive: f64 = xs.iter().sum();
        assert_abs_diff_eq!(pairwise_sum(&xs), naive, epsilon = 1e-9);
    }
}
