//! Candidate Lyapunov pairs: seeded random `Q`, and `P` from the outer and
//! inner centred ellipsoids of a symmetric polytope (`Z` or `B̄Ū`).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::bounds::LyapunovPair;
use crate::error::{Error, Result};
use crate::geometry::{HPolytope, VPolytope};
use crate::linalg::{default_tol_eig, spectrum, symmetric_eigenvalues, Matrix, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairKind {
    Random,
    /// Smallest ellipsoid around `Z`.
    OuterEllipsoid,
    /// Largest ellipsoid inside `Z`.
    InnerEllipsoid,
    /// Same constructions applied to the nominal set `B̄Ū`.
    NominalOuterEllipsoid,
    NominalInnerEllipsoid,
    User,
}

impl PairKind {
    pub fn label(self) -> &'static str {
        match self {
            PairKind::Random => "random",
            PairKind::OuterEllipsoid => "outer-ellipsoid",
            PairKind::InnerEllipsoid => "inner-ellipsoid",
            PairKind::NominalOuterEllipsoid => "nominal-outer-ellipsoid",
            PairKind::NominalInnerEllipsoid => "nominal-inner-ellipsoid",
            PairKind::User => "user",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PairSource {
    pub kind: PairKind,
    pub seed: Option<u64>,
    pub index: Option<usize>,
    /// Smallest eigenvalue of `Q`.
    pub q_margin: f64,
}

fn ensure_hurwitz(a: &Matrix) -> Result<()> {
    let spec = spectrum(a, default_tol_eig(a));
    if spec.hurwitz {
        Ok(())
    } else {
        Err(Error::NotHurwitz {
            max_real: spec.max_real(),
        })
    }
}

/// Random `Q = GGᵀ + 1e−3·tr(GGᵀ)/n·I` for stream `index` of `seed`.
pub fn random_q(n: usize, seed: u64, index: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let g = Matrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let ggt = &g * g.transpose();
    let shift = 1e-3 * ggt.trace() / n as f64;
    ggt + Matrix::identity(n, n) * shift
}

/// `count` pairs with random `Q`; pair `i` only depends on `(seed, i)`.
pub fn sample_pairs(a: &Matrix, count: usize, seed: u64) -> Result<Vec<LyapunovPair>> {
    ensure_hurwitz(a)?;
    (0..count)
        .map(|i| LyapunovPair::from_q(a, random_q(a.nrows(), seed, i as u64)))
        .collect()
}

/// An ellipsoid-derived `P` and, when `Q = −AᵀP − PA` is positive
/// definite, the resulting pair.
#[derive(Debug, Clone, Serialize)]
pub struct EllipsoidPair {
    pub p: Matrix,
    pub q_margin: f64,
    pub pair: Option<LyapunovPair>,
}

fn gate(a: &Matrix, p: Matrix) -> Result<EllipsoidPair> {
    let q = -(a.transpose() * &p + &p * a);
    let q = (&q + q.transpose()) * 0.5;
    let q_margin = symmetric_eigenvalues(&q)[0];
    let pair = if q_margin > 0.0 {
        Some(LyapunovPair::new(a, p.clone(), q)?)
    } else {
        None
    };
    Ok(EllipsoidPair { p, q_margin, pair })
}

/// Minimum-volume origin-centred ellipsoid `{x : xᵀEx ≤ 1}` containing
/// `±vᵢ`, by Khachiyan's method with away steps. Returns `E`.
pub fn mvee_centered(points: &[Vector], tol: f64) -> Result<Matrix> {
    let m = points.len();
    let n = points
        .first()
        .map(|p| p.len())
        .ok_or_else(|| Error::DegenerateSet("no points".into()))?;
    let nf = n as f64;
    let mut u = vec![1.0 / m as f64; m];
    let xmat = |u: &[f64]| {
        points
            .iter()
            .zip(u)
            .fold(Matrix::zeros(n, n), |acc, (p, w)| {
                acc + p * p.transpose() * *w
            })
    };
    for _ in 0..100_000 {
        let x = xmat(&u);
        let chol = x
            .clone()
            .cholesky()
            .ok_or_else(|| Error::DegenerateSet("points do not span the space".into()))?;
        let kappa: Vec<f64> = points.iter().map(|p| p.dot(&chol.solve(p))).collect();
        let (jmax, kmax) = kappa
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
        let (jmin, kmin) = kappa
            .iter()
            .copied()
            .enumerate()
            .filter(|(i, _)| u[*i] > 0.0)
            .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        let up = kmax / nf - 1.0;
        let down = 1.0 - kmin / nf;
        if up <= tol && down <= tol {
            return Ok(chol.inverse() / nf);
        }
        if up >= down {
            let alpha = (kmax - nf) / (nf * (kmax - 1.0));
            u.iter_mut().for_each(|w| *w *= 1.0 - alpha);
            u[jmax] += alpha;
        } else {
            let cap = u[jmin] / (1.0 - u[jmin]);
            let alpha = if kmin > 1.0 {
                ((nf - kmin) / (nf * (kmin - 1.0))).min(cap)
            } else {
                cap
            };
            u.iter_mut().for_each(|w| *w *= 1.0 + alpha);
            u[jmin] -= alpha;
            if u[jmin] < 1e-300 {
                u[jmin] = 0.0;
            }
        }
    }
    Err(Error::NonConvergence("ellipsoid iteration limit".into()))
}

/// Distinct points up to sign.
fn halve(points: &[Vector]) -> Vec<Vector> {
    let mut out: Vec<Vector> = Vec::new();
    for p in points {
        let s = 1e-10 * (1.0 + p.amax());
        if !out
            .iter()
            .any(|q| (q - p).amax() <= s || (q + p).amax() <= s)
        {
            out.push(p.clone());
        }
    }
    out
}

/// `P` of the smallest centred ellipsoid around `Z`, scaled so that
/// `max vᵀPv = 1` over the vertices.
pub fn outer_ellipsoid_pair(a: &Matrix, z: &VPolytope) -> Result<EllipsoidPair> {
    ensure_hurwitz(a)?;
    let pts = halve(z.vertices());
    // Work in units of the set's size so tolerances are meaningful.
    let scale = pts.iter().map(|p| p.amax()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::DegenerateSet("Z is a point".into()));
    }
    let scaled: Vec<Vector> = pts.iter().map(|p| p / scale).collect();
    let e = mvee_centered(&scaled, 1e-7)? / (scale * scale);
    let e = (&e + e.transpose()) * 0.5;
    let worst = pts.iter().map(|v| v.dot(&(&e * v))).fold(0.0, f64::max);
    gate(a, e / worst)
}

/// `P` of the largest centred ellipsoid inside `Z`, scaled so that the
/// smallest `‖·‖_P` on the boundary is 1. Computed as the polar of the
/// smallest centred ellipsoid around the points `aᵢ/bᵢ`.
pub fn inner_ellipsoid_pair(a: &Matrix, z: &HPolytope) -> Result<EllipsoidPair> {
    ensure_hurwitz(a)?;
    if z.min_offset() <= 1e-12 {
        return Err(Error::OriginNotInterior);
    }
    let polar: Vec<Vector> = z.facets().iter().map(|f| &f.normal / f.offset).collect();
    let pts = halve(&polar);
    let scale = pts.iter().map(|p| p.amax()).fold(0.0, f64::max);
    let scaled: Vec<Vector> = pts.iter().map(|p| p / scale).collect();
    let e = mvee_centered(&scaled, 1e-7)? / (scale * scale);
    let s = (&e + e.transpose()) * 0.5;
    let p = s
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::DegenerateSet("singular ellipsoid".into()))?;
    let p = (&p + p.transpose()) * 0.5;
    // z_min^P = min bᵢ / √(aᵢᵀP⁻¹aᵢ)
    let z_min = z
        .facets()
        .iter()
        .map(|f| f.offset / f.normal.dot(&(&s * &f.normal)).sqrt())
        .fold(f64::INFINITY, f64::min);
    gate(a, p / (z_min * z_min))
}
