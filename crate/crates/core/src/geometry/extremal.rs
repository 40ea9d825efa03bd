//! Extremes of `‖x‖_P = ‖Mx‖₂` over polytopes and their boundaries.

use serde::Serialize;

use super::{HPolytope, HyperBox, VPolytope};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

#[derive(Debug, Clone, Serialize)]
pub struct Extremum {
    pub value: f64,
    /// The optimizer, in the coordinates of the set that was searched.
    pub point: Vector,
}

/// Maximum P-norm over a vertex list (convex maximization is attained at a
/// vertex). `m` is the Cholesky factor of `P`.
pub fn pnorm_max_vertices(v: &VPolytope, m: &Matrix) -> Extremum {
    let (value, point) = v.vertices().iter().map(|x| ((m * x).norm(), x)).fold(
        (f64::NEG_INFINITY, None),
        |acc, (val, x)| {
            if val > acc.0 {
                (val, Some(x))
            } else {
                acc
            }
        },
    );
    Extremum {
        value,
        point: point.cloned().unwrap_or_else(|| Vector::zeros(v.dim())),
    }
}

/// `max {‖B̄ū‖_P : ū ∈ box}` by enumerating the box corners. The returned
/// point is the maximizing `ū`.
pub fn pnorm_max_box_image(bmat: &Matrix, bx: &HyperBox, m: &Matrix) -> Result<Extremum> {
    if bmat.ncols() != bx.dim() || m.ncols() != bmat.nrows() {
        return Err(Error::DimensionMismatch("pnorm_max_box_image".into()));
    }
    let mb = m * bmat;
    let mut best = Extremum {
        value: f64::NEG_INFINITY,
        point: Vector::zeros(bx.dim()),
    };
    for u in bx.corners() {
        let val = (&mb * &u).norm();
        if val > best.value {
            best = Extremum {
                value: val,
                point: u,
            };
        }
    }
    Ok(best)
}

/// `min {‖z‖_P : z ∈ ∂Z}` for a polytope with the origin in its interior.
///
/// The largest P-ball around the origin inside `{aᵢᵀz ≤ bᵢ}` has radius
/// `min bᵢ / ‖aᵢ‖_{P⁻¹}` and touches facet `i` at `bᵢ P⁻¹aᵢ / (aᵢᵀP⁻¹aᵢ)`.
pub fn pnorm_min_boundary(h: &HPolytope, m: &Matrix) -> Result<Extremum> {
    if h.min_offset() <= 1e-12 {
        return Err(Error::OriginNotInterior);
    }
    if m.ncols() != h.dim() {
        return Err(Error::DimensionMismatch("pnorm_min_boundary".into()));
    }
    let chol = (m.transpose() * m).cholesky().ok_or(Error::NotSpd)?;
    let mut best = Extremum {
        value: f64::INFINITY,
        point: Vector::zeros(h.dim()),
    };
    for f in h.facets() {
        let y = chol.solve(&f.normal);
        let q = f.normal.dot(&y);
        if !(q.is_finite() && q > 0.0) {
            continue;
        }
        let val = f.offset / q.sqrt();
        if val < best.value {
            best = Extremum {
                value: val,
                point: y * (f.offset / q),
            };
        }
    }
    Ok(best)
}

/// `min {‖B̄ū‖_P : ū ∈ ∂box}`: per box facet (one coordinate pinned at
/// ±half-width), projected gradient on the remaining coordinates. The
/// returned point is the minimizing `ū`.
pub fn pnorm_min_box_boundary(bmat: &Matrix, bx: &HyperBox, m: &Matrix) -> Result<Extremum> {
    let k = bx.dim();
    if bmat.ncols() != k || m.ncols() != bmat.nrows() {
        return Err(Error::DimensionMismatch("pnorm_min_box_boundary".into()));
    }
    let mb = m * bmat;
    let gram = mb.transpose() * &mb;
    let lipschitz = 2.0
        * gram
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(0.0, f64::max);
    let w = bx.half_widths();
    let mut best = Extremum {
        value: f64::INFINITY,
        point: Vector::zeros(k),
    };
    if lipschitz == 0.0 {
        let mut u = Vector::zeros(k);
        if k > 0 {
            u[0] = w[0];
        }
        return Ok(Extremum {
            value: 0.0,
            point: u,
        });
    }
    let step = 1.0 / lipschitz;
    for pinned in 0..k {
        for sign in [1.0, -1.0] {
            let mut u = Vector::zeros(k);
            u[pinned] = sign * w[pinned];
            let mut f = u.dot(&(&gram * &u));
            for _ in 0..200_000 {
                let g = &gram * &u * 2.0;
                let mut next = &u - g * step;
                for i in 0..k {
                    next[i] = if i == pinned {
                        u[i]
                    } else {
                        next[i].clamp(-w[i], w[i])
                    };
                }
                let fn_ = next.dot(&(&gram * &next));
                let improvement = f - fn_;
                u = next;
                f = fn_;
                if improvement < 1e-12 * f.max(1e-300) || improvement <= 1e-300 {
                    break;
                }
            }
            let val = f.max(0.0).sqrt();
            if val < best.value {
                best = Extremum {
                    value: val,
                    point: u,
                };
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{image_box, vertices, zonotope_to_hrep, Zonotope};
    use crate::linalg::cholesky_factor;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn v(x: &[f64]) -> Vector {
        Vector::from_column_slice(x)
    }

    fn square() -> (HPolytope, VPolytope) {
        let z = Zonotope::new(2, vec![v(&[1.0, 0.0]), v(&[0.0, 1.0])]).unwrap();
        let h = zonotope_to_hrep(&z).unwrap();
        let vp = vertices(&h).unwrap();
        (h, vp)
    }

    fn diag(d: &[f64]) -> Matrix {
        Matrix::from_diagonal(&v(d))
    }

    /// Smallest P-norm over boundary points hit by rays from the origin in
    /// `k` random directions. An upper bound that tightens with `k`.
    fn ray_oracle(h: &HPolytope, m: &Matrix, k: usize, rng: &mut ChaCha8Rng) -> f64 {
        let n = h.dim();
        (0..k)
            .map(|_| {
                let d = Vector::from_fn(n, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal));
                let t = h
                    .facets()
                    .iter()
                    .filter(|f| f.normal.dot(&d) > 0.0)
                    .map(|f| f.offset / f.normal.dot(&d))
                    .fold(f64::INFINITY, f64::min);
                (m * d).norm() * t
            })
            .fold(f64::INFINITY, f64::min)
    }

    fn on_boundary(h: &HPolytope, z: &Vector) -> bool {
        let slack = h
            .facets()
            .iter()
            .map(|f| f.offset - f.normal.dot(z))
            .fold(f64::INFINITY, f64::min);
        h.contains(z, 1e-9) && slack.abs() < 1e-9
    }

    #[test]
    fn max_over_square() {
        let (_, vp) = square();
        let e = pnorm_max_vertices(&vp, &Matrix::identity(2, 2));
        assert!((e.value - 2f64.sqrt()).abs() < 1e-12);
        let m = cholesky_factor(&diag(&[4.0, 1.0])).unwrap();
        let e = pnorm_max_vertices(&vp, &m);
        assert!((e.value - 5f64.sqrt()).abs() < 1e-12);
        assert!((e.point[0].abs() - 1.0).abs() < 1e-12 && (e.point[1].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn box_image_max_identity() {
        let e = pnorm_max_box_image(
            &Matrix::identity(2, 2),
            &HyperBox::unit(2),
            &Matrix::identity(2, 2),
        )
        .unwrap();
        assert!((e.value - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn min_over_square_boundary() {
        let (h, _) = square();
        let e = pnorm_min_boundary(&h, &Matrix::identity(2, 2)).unwrap();
        assert!((e.value - 1.0).abs() < 1e-12);
        let m = cholesky_factor(&diag(&[4.0, 1.0])).unwrap();
        let e = pnorm_min_boundary(&h, &m).unwrap();
        assert!((e.value - 1.0).abs() < 1e-12);
        assert!(e.point[0].abs() < 1e-12 && (e.point[1].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn min_requires_interior_origin() {
        let h = HPolytope::new(
            2,
            vec![
                (v(&[1.0, 0.0]), 1.0),
                (v(&[-1.0, 0.0]), 0.0),
                (v(&[0.0, 1.0]), 1.0),
                (v(&[0.0, -1.0]), 1.0),
            ],
        )
        .unwrap();
        assert!(matches!(
            pnorm_min_boundary(&h, &Matrix::identity(2, 2)),
            Err(Error::OriginNotInterior)
        ));
    }

    #[test]
    fn anisotropic_norm_on_thin_rhombus() {
        let z = Zonotope::new(2, vec![v(&[3.0, 0.2]), v(&[0.1, 1.0])]).unwrap();
        let h = zonotope_to_hrep(&z).unwrap();
        let p = Matrix::from_row_slice(2, 2, &[1.0, 0.9, 0.9, 1.0]);
        let m = cholesky_factor(&p).unwrap();
        let e = pnorm_min_boundary(&h, &m).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let oracle = ray_oracle(&h, &m, 200_000, &mut rng);
        assert!(e.value <= oracle * (1.0 + 1e-12));
        assert!(oracle <= e.value * (1.0 + 1e-4), "{} vs {oracle}", e.value);
        assert!(on_boundary(&h, &e.point));
        assert!(((&m * &e.point).norm() - e.value).abs() < 1e-12);
    }

    #[test]
    fn min_matches_ray_sampling_on_random_zonotopes() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for n in 2..=3 {
            for _ in 0..10 {
                let gens: Vec<Vector> = (0..n + 2)
                    .map(|_| Vector::from_fn(n, |_, _| rng.random_range(-1.0..1.0)))
                    .collect();
                let h = zonotope_to_hrep(&Zonotope::new(n, gens).unwrap()).unwrap();
                let g = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
                let p = &g * g.transpose() + Matrix::identity(n, n) * 0.05;
                let m = cholesky_factor(&p).unwrap();
                let e = pnorm_min_boundary(&h, &m).unwrap();
                let oracle = ray_oracle(&h, &m, 100_000, &mut rng);
                assert!(e.value <= oracle * (1.0 + 1e-12));
                assert!(oracle <= e.value * 1.01, "{} vs {oracle}", e.value);
                assert!(on_boundary(&h, &e.point));
            }
        }
    }

    #[test]
    fn box_boundary_min_square_map() {
        let m = cholesky_factor(&diag(&[4.0, 1.0])).unwrap();
        let e = pnorm_min_box_boundary(&Matrix::identity(2, 2), &HyperBox::unit(2), &m).unwrap();
        assert!((e.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn box_boundary_min_with_wide_map_reaches_zero() {
        // B̄ = [1 1]: ū = (1, −1) is on the boundary and maps to 0.
        let bmat = Matrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let e = pnorm_min_box_boundary(&bmat, &HyperBox::unit(2), &Matrix::identity(1, 1)).unwrap();
        assert!(e.value < 1e-6);
        let z = image_box(&bmat, &HyperBox::unit(2)).unwrap();
        let h = zonotope_to_hrep(&z).unwrap();
        let img = pnorm_min_boundary(&h, &Matrix::identity(1, 1)).unwrap();
        assert!((img.value - 2.0).abs() < 1e-12);
    }
}
