//! Dense small-dimension linear algebra: spectra, Lyapunov equations,
//! Cholesky factors and the matrix exponential.
//!
//! Everything here targets state dimensions of at most ten, so the
//! straightforward dense methods are preferred over structured ones.

use nalgebra::{Complex, DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Infinity norm (maximum absolute row sum).
pub fn norm_inf(a: &Matrix) -> f64 {
    a.row_iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Default eigenvalue tolerance, relative to the size of `a`.
pub fn default_tol_eig(a: &Matrix) -> f64 {
    1e-9 * (1.0 + norm_inf(a))
}

pub fn is_symmetric(a: &Matrix, tol: f64) -> bool {
    a.is_square() && (a - a.transpose()).amax() <= tol * (1.0 + a.amax())
}

/// Eigenvalues of a symmetric matrix in ascending order.
pub fn symmetric_eigenvalues(a: &Matrix) -> Vec<f64> {
    let sym = (a + a.transpose()) * 0.5;
    let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Upper-triangular `M` with `P = MᵀM`, so that `‖x‖_P = ‖Mx‖₂`.
pub fn cholesky_factor(p: &Matrix) -> Result<Matrix> {
    if !is_symmetric(p, 1e-10) {
        return Err(Error::NotSpd);
    }
    let sym = (p + p.transpose()) * 0.5;
    let chol = sym.cholesky().ok_or(Error::NotSpd)?;
    let l = chol.l();
    if l.diagonal().iter().any(|d| d.is_nan() || *d <= 0.0) {
        return Err(Error::NotSpd);
    }
    Ok(l.transpose())
}

/// Solves `AᵀP + PA = −Q` for the symmetric positive definite `P`.
///
/// Uses the vectorized (Kronecker) form, which is exact enough for the
/// dimensions in scope.
pub fn solve_lyapunov(a: &Matrix, q: &Matrix) -> Result<Matrix> {
    let n = a.nrows();
    if !a.is_square() || q.nrows() != n || q.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "A is {}x{}, Q is {}x{}",
            a.nrows(),
            a.ncols(),
            q.nrows(),
            q.ncols()
        )));
    }
    cholesky_factor(q)?;
    let spec = spectrum(a, default_tol_eig(a));
    if !spec.hurwitz {
        return Err(Error::NotHurwitz {
            max_real: spec.max_real(),
        });
    }
    // vec(AᵀP + PA) = (I ⊗ Aᵀ + Aᵀ ⊗ I) vec(P), column-major vec.
    let at = a.transpose();
    let nn = n * n;
    let mut k = Matrix::zeros(nn, nn);
    for j in 0..n {
        for i in 0..n {
            let row = j * n + i;
            for l in 0..n {
                // (AᵀP)_{ij} = Σ_l Aᵀ_{il} P_{lj}
                k[(row, j * n + l)] += at[(i, l)];
                // (PA)_{ij} = Σ_l P_{il} A_{lj}
                k[(row, l * n + i)] += a[(l, j)];
            }
        }
    }
    let rhs = -Vector::from_column_slice(q.as_slice());
    let sol = k.lu().solve(&rhs).ok_or_else(|| Error::NotHurwitz {
        max_real: spec.max_real(),
    })?;
    let p = Matrix::from_column_slice(n, n, sol.as_slice());
    Ok((&p + p.transpose()) * 0.5)
}

/// Residual `‖AᵀP + PA + Q‖_F`.
pub fn lyapunov_residual(a: &Matrix, p: &Matrix, q: &Matrix) -> f64 {
    (a.transpose() * p + p * a + q).norm()
}

#[derive(Debug, Clone, Serialize)]
pub struct RealEigenvector {
    pub eigenvalue: f64,
    pub vector: Vec<f64>,
}

/// Eigenvalues of `A` together with the real eigenvectors of `Aᵀ`.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<Complex<f64>>,
    /// One unit vector per basis direction of each real eigenspace of `Aᵀ`;
    /// the sign is arbitrary.
    pub real_eigenvectors: Vec<RealEigenvector>,
    /// All real parts below `-tol`.
    pub hurwitz: bool,
    /// All real parts within `tol` of zero.
    pub marginal: bool,
    /// All real parts at most `tol`.
    pub semistable: bool,
    pub tol: f64,
}

impl Spectrum {
    pub fn max_real(&self) -> f64 {
        self.eigenvalues
            .iter()
            .map(|l| l.re)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn spectrum(a: &Matrix, tol_eig: f64) -> Spectrum {
    let n = a.nrows();
    let mut eigenvalues: Vec<Complex<f64>> = a.complex_eigenvalues().iter().copied().collect();
    eigenvalues.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));

    let hurwitz = eigenvalues.iter().all(|l| l.re < -tol_eig);
    let marginal = eigenvalues.iter().all(|l| l.re.abs() <= tol_eig);
    let semistable = eigenvalues.iter().all(|l| l.re <= tol_eig);

    // Cluster the real eigenvalues, then take the numerical nullspace of
    // (Aᵀ − λI) once per cluster.
    let mut reals: Vec<f64> = eigenvalues
        .iter()
        .filter(|l| l.im.abs() <= tol_eig)
        .map(|l| l.re)
        .collect();
    reals.sort_by(f64::total_cmp);
    let mut clusters: Vec<Vec<f64>> = Vec::new();
    for r in reals {
        match clusters.last_mut() {
            Some(c) if (r - c[c.len() - 1]).abs() <= tol_eig.max(1e-6 * (1.0 + r.abs())) => {
                c.push(r)
            }
            _ => clusters.push(vec![r]),
        }
    }

    let at = a.transpose();
    let scale = norm_inf(a).max(1e-300);
    let mut real_eigenvectors = Vec::new();
    for c in clusters {
        let lambda = c.iter().sum::<f64>() / c.len() as f64;
        let shifted = &at - Matrix::identity(n, n) * lambda;
        let svd = shifted.clone().svd(false, true);
        let v_t = match svd.v_t {
            Some(v) => v,
            None => continue,
        };
        let thresh = tol_eig.max(1e-7 * scale);
        for (k, s) in svd.singular_values.iter().enumerate() {
            if *s > thresh {
                continue;
            }
            let mut v: Vector = v_t.row(k).transpose();
            v /= v.norm();
            // Rayleigh refinement of the eigenvalue for this direction.
            let lam = v.dot(&(&at * &v));
            let residual = (&at * &v - &v * lam).norm();
            if residual <= 1e-9 * scale.max(1.0) {
                real_eigenvectors.push(RealEigenvector {
                    eigenvalue: lam,
                    vector: v.iter().copied().collect(),
                });
            }
        }
    }

    Spectrum {
        eigenvalues,
        real_eigenvectors,
        hurwitz,
        marginal,
        semistable,
        tol: tol_eig,
    }
}

/// Matrix exponential `e^{At}` (scaling and squaring with a Padé approximant).
pub fn expm(a: &Matrix, t: f64) -> Matrix {
    (a * t).exp()
}

/// Numerical rank from singular values, threshold `tol·σ_max`.
pub fn rank(a: &Matrix, tol: f64) -> usize {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0;
    }
    let sv = a.singular_values();
    let smax = sv.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|s| **s > tol * smax).count()
}
