//! Dense linear algebra substrate: vectors and matrices, Cholesky factors of
//! symmetric positive-definite matrices, a nonsymmetric eigensolver and
//! (semi-)norms induced by positive semi-definite metrics.
//!
//! Storage is delegated to `nalgebra`; everything that carries a contract of
//! its own (pivot reporting, fingerprints, eigenvector residuals) lives here.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Vector = DVector<f64>;
pub type DenseMatrix = DMatrix<f64>;
pub type ComplexScalar = Complex64;
pub type ComplexVector = DVector<Complex64>;

/// Relative tolerance for the symmetry check in [`spd_factor`].
pub const SYMMETRY_TOL: f64 = 1e-10;
/// Relative clamp for slightly negative quadratic forms in [`seminorm`].
pub const PSD_CLAMP: f64 = 1e-12;
/// Relative eigenpair residual accepted by [`eig_pairs`].
pub const EIG_RESIDUAL_TOL: f64 = 1e-8;

const SCHUR_MAX_SWEEPS: usize = 10_000;

/// Lower-triangular Cholesky factor `L` with `L Lᵀ = S`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdFactor {
    lower: DenseMatrix,
    fingerprint: f64,
}

impl SpdFactor {
    pub fn dim(&self) -> usize {
        self.lower.nrows()
    }

    pub fn lower(&self) -> &DenseMatrix {
        &self.lower
    }

    /// Scalar identifying the matrix this factor was built from. Callers that
    /// cache factors use it as the cache key; `NaN` means "unkeyed".
    pub fn fingerprint(&self) -> f64 {
        self.fingerprint
    }

    pub fn with_fingerprint(mut self, fingerprint: f64) -> Self {
        self.fingerprint = fingerprint;
        self
    }

    /// `L Lᵀ`, mostly for tests.
    pub fn reconstruct(&self) -> DenseMatrix {
        &self.lower * self.lower.transpose()
    }
}

fn max_abs(m: &DenseMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Cholesky factorization of a symmetric positive-definite matrix.
pub fn spd_factor(s: &DenseMatrix) -> Result<SpdFactor> {
    let n = s.nrows();
    if s.ncols() != n {
        return Err(Error::NotSquare {
            rows: n,
            cols: s.ncols(),
        });
    }
    let scale = max_abs(s).max(f64::MIN_POSITIVE);
    let mut asym = 0.0_f64;
    for i in 0..n {
        for j in 0..i {
            asym = asym.max((s[(i, j)] - s[(j, i)]).abs());
        }
    }
    if asym > SYMMETRY_TOL * scale {
        return Err(Error::NotSymmetric {
            asymmetry: asym / scale,
        });
    }

    let mut l = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = s[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::NotPositiveDefinite { pivot: j, value: d });
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in (j + 1)..n {
            let mut v = s[(i, j)];
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = v / d;
        }
    }
    Ok(SpdFactor {
        lower: l,
        fingerprint: f64::NAN,
    })
}

/// Solves `S x = rhs` given the Cholesky factor of `S`.
pub fn spd_solve(factor: &SpdFactor, rhs: &Vector) -> Result<Vector> {
    let n = factor.dim();
    if rhs.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: rhs.len(),
        });
    }
    let l = &factor.lower;
    let mut y = rhs.clone();
    // forward: L y = rhs
    for i in 0..n {
        let mut v = y[i];
        for k in 0..i {
            v -= l[(i, k)] * y[k];
        }
        y[i] = v / l[(i, i)];
    }
    // backward: Lᵀ x = y
    for i in (0..n).rev() {
        let mut v = y[i];
        for k in (i + 1)..n {
            v -= l[(k, i)] * y[k];
        }
        y[i] = v / l[(i, i)];
    }
    Ok(y)
}

/// An eigenvalue together with a unit eigenvector.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: ComplexScalar,
    pub vector: ComplexVector,
}

fn check_square(m: &DenseMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

/// All eigenvalues of a real square matrix, with multiplicity.
///
/// Uses a real Schur decomposition (Hessenberg reduction followed by shifted
/// QR sweeps). Failure to converge is reported, never papered over.
pub fn eig_all(m: &DenseMatrix) -> Result<Vec<ComplexScalar>> {
    let n = check_square(m)?;
    if n == 0 {
        return Ok(Vec::new());
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenNoConvergence { dim: n });
    }
    let schur = m
        .clone()
        .try_schur(f64::EPSILON, SCHUR_MAX_SWEEPS)
        .ok_or(Error::EigenNoConvergence { dim: n })?;
    let values: Vec<ComplexScalar> = schur.complex_eigenvalues().iter().copied().collect();
    if values.len() != n || values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::EigenNoConvergence { dim: n });
    }
    Ok(values)
}

/// Eigenvalues with unit eigenvectors, each satisfying
/// `‖M z − λ z‖ ≤ 1e-8 ‖M‖_F`.
///
/// Eigenvectors come from inverse iteration on `M − λI`; a conjugate pair
/// shares one solve.
pub fn eig_pairs(m: &DenseMatrix) -> Result<Vec<EigenPair>> {
    let values = eig_all(m)?;
    let n = m.nrows();
    let mc: DMatrix<Complex64> = m.map(|v| Complex64::new(v, 0.0));
    let norm = m.norm().max(f64::MIN_POSITIVE);
    let bound = EIG_RESIDUAL_TOL * norm;

    let mut pairs: Vec<EigenPair> = Vec::with_capacity(n);
    for &lambda in &values {
        if lambda.im < 0.0 {
            let conj = lambda.conj();
            if let Some(p) = pairs.iter().find(|p| p.value == conj) {
                let vector = p.vector.map(|z| z.conj());
                pairs.push(EigenPair {
                    value: lambda,
                    vector,
                });
                continue;
            }
        }
        let vector = inverse_iteration(&mc, lambda, norm)?;
        let residual = (&mc * &vector - &vector * lambda).norm();
        if residual > bound {
            return Err(Error::EigenvectorResidual { residual, bound });
        }
        pairs.push(EigenPair {
            value: lambda,
            vector,
        });
    }
    Ok(pairs)
}

fn inverse_iteration(m: &DMatrix<Complex64>, shift: Complex64, norm: f64) -> Result<ComplexVector> {
    let n = m.nrows();
    let mut shifted = m.clone();
    for i in 0..n {
        shifted[(i, i)] -= shift;
    }
    let lu = ComplexLu::new(shifted, f64::EPSILON * norm);
    let mut z = ComplexVector::from_fn(n, |i, _| {
        Complex64::new(1.0 / (1.0 + i as f64), 0.5 / (2.0 + i as f64))
    });
    let tol = 1e-2 * EIG_RESIDUAL_TOL * norm;
    for _ in 0..4 {
        let next = lu.solve(&z);
        let len = next.norm();
        if !len.is_finite() || len == 0.0 {
            return Err(Error::EigenNoConvergence { dim: n });
        }
        z = next / Complex64::new(len, 0.0);
        if (m * &z - &z * shift).norm() <= tol {
            break;
        }
    }
    Ok(z)
}

/// Complex LU with partial pivoting; tiny pivots are lifted to `floor` so the
/// nearly singular systems of inverse iteration stay solvable.
struct ComplexLu {
    lu: DMatrix<Complex64>,
    perm: Vec<usize>,
}

impl ComplexLu {
    fn new(mut a: DMatrix<Complex64>, floor: f64) -> Self {
        let n = a.nrows();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (mut p, mut best) = (k, a[(k, k)].norm());
            for i in (k + 1)..n {
                let v = a[(i, k)].norm();
                if v > best {
                    p = i;
                    best = v;
                }
            }
            if p != k {
                a.swap_rows(k, p);
                perm.swap(k, p);
            }
            if a[(k, k)].norm() < floor {
                a[(k, k)] = Complex64::new(floor.max(f64::MIN_POSITIVE), 0.0);
            }
            let pivot = a[(k, k)];
            for i in (k + 1)..n {
                let factor = a[(i, k)] / pivot;
                a[(i, k)] = factor;
                if factor != Complex64::new(0.0, 0.0) {
                    for j in (k + 1)..n {
                        let u = a[(k, j)];
                        a[(i, j)] -= factor * u;
                    }
                }
            }
        }
        ComplexLu { lu: a, perm }
    }

    fn solve(&self, b: &ComplexVector) -> ComplexVector {
        let n = self.lu.nrows();
        let mut x = ComplexVector::from_fn(n, |i, _| b[self.perm[i]]);
        for i in 0..n {
            let mut v = x[i];
            for k in 0..i {
                v -= self.lu[(i, k)] * x[k];
            }
            x[i] = v;
        }
        for i in (0..n).rev() {
            let mut v = x[i];
            for k in (i + 1)..n {
                v -= self.lu[(i, k)] * x[k];
            }
            x[i] = v / self.lu[(i, i)];
        }
        x
    }
}

/// `sqrt(⟨M u, u⟩)` for a positive semi-definite `M`.
pub fn seminorm(u: &Vector, m: &DenseMatrix) -> Result<f64> {
    let n = check_square(m)?;
    if u.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: u.len(),
        });
    }
    let inner = (m * u).dot(u);
    if inner >= 0.0 {
        Ok(inner.sqrt())
    } else if inner >= -PSD_CLAMP * u.norm_squared() {
        Ok(0.0)
    } else {
        Err(Error::NotPsd { inner })
    }
}

/// Seminorm of a diagonal metric given by its diagonal entries.
pub fn diag_seminorm(u: &Vector, diag: &Vector) -> f64 {
    u.iter()
        .zip(diag.iter())
        .map(|(x, d)| d * x * x)
        .sum::<f64>()
        .max(0.0)
        .sqrt()
}

/// Stacks `top` over `bottom`.
pub fn concat(top: &Vector, bottom: &Vector) -> Vector {
    let n = top.len();
    Vector::from_fn(n + bottom.len(), |i, _| {
        if i < n {
            top[i]
        } else {
            bottom[i - n]
        }
    })
}

/// Splits a vector after the first `n` entries.
pub fn split(v: &Vector, n: usize) -> (Vector, Vector) {
    (v.rows(0, n).into_owned(), v.rows(n, v.len() - n).into_owned())
}

/// Block-diagonal matrix `diag(a, b)`.
pub fn block_diag(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let (n, m) = (a.nrows(), b.nrows());
    let mut out = DenseMatrix::zeros(n + m, a.ncols() + b.ncols());
    out.view_mut((0, 0), (n, a.ncols())).copy_from(a);
    out.view_mut((n, a.ncols()), (m, b.ncols())).copy_from(b);
    out
}

/// Solves a general square system with an LU factorization.
pub fn lu_solve_matrix(a: &DenseMatrix, rhs: &DenseMatrix, context: &'static str) -> Result<DenseMatrix> {
    check_square(a)?;
    a.clone()
        .lu()
        .solve(rhs)
        .filter(|x| x.iter().all(|v| v.is_finite()))
        .ok_or(Error::Singular { context })
}
