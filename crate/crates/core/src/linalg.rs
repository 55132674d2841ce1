//! Dense linear-algebra kernels: non-symmetric eigenvalues, matrix absolute
//! value, spectral radius, and a reference matrix exponential.
//!
//! All spectra in this crate come from dense real Schur decompositions; the
//! problem sizes are desk scale (a few hundred to ~2000 unknowns).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Eigenvalues of a real square matrix as complex numbers.
pub fn complex_eigenvalues(m: &DMatrix<f64>) -> Vec<Complex64> {
    let eigs = m.clone().complex_eigenvalues();
    eigs.iter().map(|z| Complex64::new(z.re, z.im)).collect()
}

/// Eigenvalues of a matrix expected to have a real spectrum.
///
/// Fails with the offending pair if any eigenvalue has an imaginary part
/// larger than `tol` relative to the spectral scale.
pub fn real_eigenvalues(m: &DMatrix<f64>, context: &'static str) -> Result<Vec<f64>> {
    let eigs = complex_eigenvalues(m);
    let scale = eigs.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let tol = 1e-9 * scale;
    for z in &eigs {
        if z.im.abs() > tol {
            return Err(Error::ComplexEigenvalue {
                re: z.re,
                im: z.im,
                context,
            });
        }
    }
    let mut vals: Vec<f64> = eigs.iter().map(|z| z.re).collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(vals)
}

/// Largest eigenvalue magnitude.
pub fn spectral_radius_of(m: &DMatrix<f64>) -> f64 {
    complex_eigenvalues(m)
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

fn is_symmetric(m: &DMatrix<f64>, tol: f64) -> bool {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            if (m[(i, j)] - m[(j, i)]).abs() > tol {
                return false;
            }
        }
    }
    true
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|v| v.abs()).fold(0.0, f64::max)
}

/// Matrix absolute value |A| = V |Λ| V⁻¹ for diagonalizable A with real
/// eigenvalues.
///
/// Symmetric input goes through a symmetric eigensolve. The general case uses
/// the real Schur form and the Parlett recurrence for f(T) on the triangular
/// factor, which requires the (real) eigenvalues to be distinct; a 2x2 Schur
/// block, i.e. a complex pair, is reported with the offending values.
pub fn matrix_abs(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    if n == 1 {
        return Ok(DMatrix::from_element(1, 1, m[(0, 0)].abs()));
    }
    let scale = max_abs(m).max(1.0);
    if is_symmetric(m, 1e-12 * scale) {
        let sym = nalgebra::SymmetricEigen::new(m.clone());
        let absd = DMatrix::from_diagonal(&sym.eigenvalues.map(f64::abs));
        return Ok(&sym.eigenvectors * absd * sym.eigenvectors.transpose());
    }
    let schur = nalgebra::Schur::try_new(m.clone(), f64::EPSILON, 0)
        .ok_or_else(|| Error::EigenSolver("Schur iteration did not converge".into()))?;
    let (q, t) = schur.unpack();
    // A 2x2 block on the diagonal of the quasi-triangular factor signals a
    // complex conjugate eigenvalue pair.
    for i in 0..n - 1 {
        if t[(i + 1, i)].abs() > 1e-12 * scale {
            let a = t[(i, i)];
            let d = t[(i + 1, i + 1)];
            let bc = t[(i, i + 1)] * t[(i + 1, i)];
            let disc = (a - d) * (a - d) / 4.0 + bc;
            let im = (-disc).max(0.0).sqrt();
            return Err(Error::ComplexEigenvalue {
                re: (a + d) / 2.0,
                im,
                context: "matrix absolute value",
            });
        }
    }
    let f = parlett(&t, f64::abs, scale)?;
    Ok(&q * f * q.transpose())
}

/// Parlett recurrence for f(T) with T upper triangular and distinct diagonal.
fn parlett(t: &DMatrix<f64>, f: impl Fn(f64) -> f64, scale: f64) -> Result<DMatrix<f64>> {
    let n = t.nrows();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        out[(i, i)] = f(t[(i, i)]);
    }
    for p in 1..n {
        for i in 0..n - p {
            let j = i + p;
            let den = t[(j, j)] - t[(i, i)];
            if den.abs() < 1e-12 * scale {
                return Err(Error::EigenSolver(format!(
                    "repeated eigenvalue {} in matrix function evaluation",
                    t[(i, i)]
                )));
            }
            let mut num = t[(i, j)] * (out[(j, j)] - out[(i, i)]);
            for k in (i + 1)..j {
                num += out[(i, k)] * t[(k, j)] - t[(i, k)] * out[(k, j)];
            }
            out[(i, j)] = num / den;
        }
    }
    Ok(out)
}

/// Matrix exponential by scaling and squaring with a Taylor series.
///
/// Reference-quality path used as an independent oracle in consistency tests;
/// not tuned for large or badly scaled inputs.
pub fn expm(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    let norm = max_abs(m) * n as f64;
    let s = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let b = m / 2f64.powi(s as i32);
    let mut term = DMatrix::<f64>::identity(n, n);
    let mut sum = DMatrix::<f64>::identity(n, n);
    for k in 1..200 {
        term = (&term * &b) / k as f64;
        sum += &term;
        if max_abs(&term) < 1e-18 * max_abs(&sum).max(1.0) {
            break;
        }
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

/// Gauss-Legendre nodes and weights on [0, 1] via the Golub-Welsch method.
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "quadrature order must be at least 1");
    if n == 1 {
        return (vec![0.5], vec![1.0]);
    }
    // Jacobi matrix of the Legendre recurrence.
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let kf = k as f64;
        let beta = kf / (4.0 * kf * kf - 1.0).sqrt();
        jac[(k - 1, k)] = beta;
        jac[(k, k - 1)] = beta;
    }
    let eig = nalgebra::SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let x = eig.eigenvalues[i];
            let w = 2.0 * eig.eigenvectors[(0, i)].powi(2);
            // map from [-1, 1] to [0, 1]
            ((x + 1.0) / 2.0, w / 2.0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    pairs.into_iter().unzip()
}

/// Check a stacked field for NaN/Inf, reporting the first bad cell/component.
pub fn check_finite(w: &DVector<f64>, n_vars: usize) -> Result<()> {
    for (idx, v) in w.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFiniteField {
                cell: idx / n_vars,
                component: idx % n_vars,
            });
        }
    }
    Ok(())
}
