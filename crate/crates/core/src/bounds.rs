//! Analytical reach-time bounds for one Lyapunov pair and their aggregation
//! over many pairs.

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geometry::{pnorm_max_vertices, pnorm_min_boundary};
use crate::linalg::{
    cholesky_factor, is_symmetric, lyapunov_residual, solve_lyapunov, symmetric_eigenvalues,
    Matrix, Vector,
};
use crate::system::Polytope;

/// `(P, Q)` with `AᵀP + PA = −Q`, both positive definite.
#[derive(Debug, Clone, Serialize)]
pub struct LyapunovPair {
    pub p: Matrix,
    pub q: Matrix,
    /// `P = MᵀM`
    pub m: Matrix,
    pub lam_min_p: f64,
    pub lam_max_p: f64,
    pub lam_min_q: f64,
    pub lam_max_q: f64,
}

impl LyapunovPair {
    pub fn new(a: &Matrix, p: Matrix, q: Matrix) -> Result<Self> {
        let n = a.nrows();
        if p.shape() != (n, n) || q.shape() != (n, n) {
            return Err(Error::InvalidPair("shape does not match A".into()));
        }
        let qn = q.norm();
        if !is_symmetric(&p, 1e-10 * p.norm()) || !is_symmetric(&q, 1e-10 * qn) {
            return Err(Error::InvalidPair("P and Q must be symmetric".into()));
        }
        let res = lyapunov_residual(a, &p, &q);
        if res > 1e-8 * qn {
            return Err(Error::InvalidPair(format!("Lyapunov residual {res:e}")));
        }
        let m = cholesky_factor(&p)
            .map_err(|_| Error::InvalidPair("P is not positive definite".into()))?;
        let ep = symmetric_eigenvalues(&p);
        let eq = symmetric_eigenvalues(&q);
        if eq[0] <= 0.0 {
            return Err(Error::InvalidPair("Q is not positive definite".into()));
        }
        Ok(Self {
            lam_min_p: ep[0],
            lam_max_p: ep[n - 1],
            lam_min_q: eq[0],
            lam_max_q: eq[n - 1],
            p,
            q,
            m,
        })
    }

    /// Solves `AᵀP + PA = −Q` for `P`.
    pub fn from_q(a: &Matrix, q: Matrix) -> Result<Self> {
        let p = solve_lyapunov(a, &q)?;
        Self::new(a, p, q)
    }

    pub fn pnorm(&self, x: &Vector) -> f64 {
        (&self.m * x).norm()
    }
}

/// A bound that is either available or absent for a stated reason.
#[derive(Debug, Clone, PartialEq)]
pub enum Bound {
    Value(f64),
    Absent(String),
}

impl Bound {
    pub fn value(&self) -> Option<f64> {
        match self {
            Bound::Value(v) => Some(*v),
            Bound::Absent(_) => None,
        }
    }
}

impl Serialize for Bound {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Bound::Value(v) => s.serialize_f64(*v),
            Bound::Absent(r) => s.serialize_str(&format!("absent: {r}")),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Interval {
    pub lower: Bound,
    pub upper: Bound,
}

/// `2(λ/μ)·ln(1 + μ‖x₀‖_P / (2λ·b))`
fn log_bound(lam_p: f64, lam_q: f64, x0_pnorm: f64, b: f64) -> f64 {
    2.0 * lam_p / lam_q * (lam_q * x0_pnorm / (2.0 * lam_p * b)).ln_1p()
}

/// Nominal reach-time bounds. `b_min` is `None` when `rank(B̄) < n`.
pub fn bound_tn(pair: &LyapunovPair, x0: &Vector, b_max: f64, b_min: Option<f64>) -> Interval {
    let x = pair.pnorm(x0);
    let lower = Bound::Value(log_bound(pair.lam_min_p, pair.lam_max_q, x, b_max));
    let upper = match b_min {
        Some(b) if b > 0.0 => Bound::Value(log_bound(pair.lam_max_p, pair.lam_min_q, x, b)),
        _ => Bound::Absent("rank(B_bar) < n".into()),
    };
    Interval { lower, upper }
}

/// Malfunctioning reach-time bounds. The lower side needs resilient
/// stabilizability, the upper side `0 ∈ int(Z)`.
pub fn bound_tm(
    pair: &LyapunovPair,
    x0: &Vector,
    z_max: f64,
    z_min: f64,
    hyp: &Hypotheses,
) -> Interval {
    let x = pair.pnorm(x0);
    let lower = if hyp.stabilizable {
        Bound::Value(log_bound(pair.lam_min_p, pair.lam_max_q, x, z_max))
    } else {
        Bound::Absent("not resiliently stabilizable".into())
    };
    let upper = if hyp.origin_interior && z_min > 0.0 {
        Bound::Value(log_bound(pair.lam_max_p, pair.lam_min_q, x, z_min))
    } else {
        Bound::Absent("origin is not interior to Z".into())
    };
    Interval { lower, upper }
}

#[derive(Debug, Clone, Serialize)]
pub struct RqInterval {
    pub lower: Bound,
    pub upper: Bound,
    /// The upper bound exceeds 1 and says nothing about the slowdown.
    pub upper_uninformative: bool,
}

pub fn bound_rq(pair: &LyapunovPair, ext: &Extremals, hyp: &Hypotheses) -> RqInterval {
    let ratio = pair.lam_min_p * pair.lam_min_q / (pair.lam_max_p * pair.lam_max_q);
    let lower = match ext.z_min {
        Some(z_min) if hyp.origin_interior && hyp.hurwitz => {
            Bound::Value(ratio.max(z_min / ext.b_max))
        }
        _ => Bound::Absent("requires 0 in int(Z) and A Hurwitz".into()),
    };
    let upper = match (ext.b_min, ext.z_max) {
        (Some(b_min), Some(z_max))
            if hyp.full_rank && hyp.stabilizable && hyp.hurwitz && b_min > 0.0 =>
        {
            Bound::Value((1.0 / ratio).max(z_max / b_min))
        }
        _ => Bound::Absent(
            "requires rank(B_bar) = n, resilient stabilizability and A Hurwitz".into(),
        ),
    };
    let upper_uninformative = upper.value().is_some_and(|u| u > 1.0);
    RqInterval {
        lower,
        upper,
        upper_uninformative,
    }
}

/// Facts about the system that gate individual bounds.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Hypotheses {
    pub hurwitz: bool,
    pub full_rank: bool,
    pub stabilizable: bool,
    pub origin_interior: bool,
}

/// P-norm extremes of the nominal image `B̄Ū` and of `Z`.
#[derive(Debug, Clone, Serialize)]
pub struct Extremals {
    pub b_max: f64,
    /// Over the boundary of `B̄Ū`.
    pub b_min: Option<f64>,
    pub z_max: Option<f64>,
    pub z_min: Option<f64>,
}

pub fn extremals(pair: &LyapunovPair, full: &Polytope, z: Option<&Polytope>) -> Result<Extremals> {
    let b_max = pnorm_max_vertices(&full.vrep, &pair.m).value;
    let b_min = Some(pnorm_min_boundary(&full.hrep, &pair.m)?.value);
    let (z_max, z_min) = match z {
        Some(z) => {
            let z_max = pnorm_max_vertices(&z.vrep, &pair.m).value;
            let z_min = match pnorm_min_boundary(&z.hrep, &pair.m) {
                Ok(e) => Some(e.value),
                Err(Error::OriginNotInterior) => None,
                Err(e) => return Err(e),
            };
            (Some(z_max), z_min)
        }
        None => (None, None),
    };
    Ok(Extremals {
        b_max,
        b_min,
        z_max,
        z_min,
    })
}

/// All bounds for one pair.
#[derive(Debug, Clone, Serialize)]
pub struct PairBounds {
    pub x0_pnorm: f64,
    pub extremals: Extremals,
    pub tn: Interval,
    pub tm: Interval,
    pub rq: RqInterval,
}

pub fn evaluate_pair(
    pair: &LyapunovPair,
    x0: &Vector,
    ext: Extremals,
    hyp: &Hypotheses,
) -> PairBounds {
    let tn = bound_tn(
        pair,
        x0,
        ext.b_max,
        if hyp.full_rank { ext.b_min } else { None },
    );
    let tm = match (ext.z_max, ext.z_min) {
        (Some(zmax), zmin) => bound_tm(pair, x0, zmax, zmin.unwrap_or(0.0), hyp),
        (None, _) => Interval {
            lower: Bound::Absent("Z has empty interior".into()),
            upper: Bound::Absent("Z has empty interior".into()),
        },
    };
    let rq = bound_rq(pair, &ext, hyp);
    PairBounds {
        x0_pnorm: pair.pnorm(x0),
        extremals: ext,
        tn,
        tm,
        rq,
    }
}

/// Best value of one bound across pairs and the pair that achieved it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Best {
    pub value: f64,
    pub pair_index: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReachBounds {
    pub tn_lower: Option<Best>,
    pub tn_upper: Option<Best>,
    pub tm_lower: Option<Best>,
    pub tm_upper: Option<Best>,
    pub rq_lower: Option<Best>,
    pub rq_upper: Option<Best>,
}

fn best_of<'a>(
    bounds: impl Iterator<Item = &'a Bound>,
    better: impl Fn(f64, f64) -> bool,
) -> Option<Best> {
    bounds
        .enumerate()
        .fold(None, |acc, (i, b)| match (acc, b.value()) {
            (None, Some(v)) => Some(Best {
                value: v,
                pair_index: i,
            }),
            (Some(a), Some(v)) if better(v, a.value) => Some(Best {
                value: v,
                pair_index: i,
            }),
            (acc, _) => acc,
        })
}

/// Largest lower and smallest upper bound over all pairs.
pub fn best_bounds(pairs: &[PairBounds]) -> Result<ReachBounds> {
    if pairs.is_empty() {
        return Err(Error::EmptyPairList);
    }
    let max = |a: f64, b: f64| a > b;
    let min = |a: f64, b: f64| a < b;
    Ok(ReachBounds {
        tn_lower: best_of(pairs.iter().map(|p| &p.tn.lower), max),
        tn_upper: best_of(pairs.iter().map(|p| &p.tn.upper), min),
        tm_lower: best_of(pairs.iter().map(|p| &p.tm.lower), max),
        tm_upper: best_of(pairs.iter().map(|p| &p.tm.upper), min),
        rq_lower: best_of(pairs.iter().map(|p| &p.rq.lower), max),
        rq_upper: best_of(pairs.iter().map(|p| &p.rq.upper), min),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_pair() -> LyapunovPair {
        let a = Matrix::from_element(1, 1, -1.0);
        LyapunovPair::new(
            &a,
            Matrix::from_element(1, 1, 1.0),
            Matrix::from_element(1, 1, 2.0),
        )
        .unwrap()
    }

    fn all_hyp() -> Hypotheses {
        Hypotheses {
            hurwitz: true,
            full_rank: true,
            stabilizable: true,
            origin_interior: true,
        }
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn scalar_nominal_bounds_are_tight() {
        let i = bound_tn(
            &scalar_pair(),
            &Vector::from_element(1, 1.0),
            1.0,
            Some(1.0),
        );
        assert!(rel(i.lower.value().unwrap(), 2f64.ln()) <= 1e-12);
        assert!(rel(i.upper.value().unwrap(), 2f64.ln()) <= 1e-12);
    }

    #[test]
    fn scalar_malfunction_bounds_are_tight() {
        let i = bound_tm(
            &scalar_pair(),
            &Vector::from_element(1, 1.0),
            0.5,
            0.5,
            &all_hyp(),
        );
        assert!(rel(i.lower.value().unwrap(), 3f64.ln()) <= 1e-12);
        assert!(rel(i.upper.value().unwrap(), 3f64.ln()) <= 1e-12);
    }

    #[test]
    fn zero_state_gives_zero() {
        let i = bound_tn(&scalar_pair(), &Vector::zeros(1), 1.0, Some(1.0));
        assert_eq!(i.lower, Bound::Value(0.0));
        assert_eq!(i.upper, Bound::Value(0.0));
    }

    #[test]
    fn scalar_rq_probe() {
        let ext = Extremals {
            b_max: 1.0,
            b_min: Some(1.0),
            z_max: Some(0.5),
            z_min: Some(0.5),
        };
        let rq = bound_rq(&scalar_pair(), &ext, &all_hyp());
        assert_eq!(rq.lower, Bound::Value(1.0));
        assert_eq!(rq.upper, Bound::Value(1.0));
        assert!(!rq.upper_uninformative);
    }

    #[test]
    fn no_loss_rq_substitution() {
        let a = -Matrix::identity(2, 2);
        let q = Matrix::from_diagonal(&Vector::from_column_slice(&[2.0, 6.0]));
        let pair = LyapunovPair::from_q(&a, q).unwrap();
        let ext = Extremals {
            b_max: 2.0,
            b_min: Some(0.5),
            z_max: Some(2.0),
            z_min: Some(0.5),
        };
        let rq = bound_rq(&pair, &ext, &all_hyp());
        let ratio = pair.lam_min_p * pair.lam_min_q / (pair.lam_max_p * pair.lam_max_q);
        assert_eq!(rq.lower.value().unwrap(), ratio.max(0.25));
        assert_eq!(rq.upper.value().unwrap(), (1.0 / ratio).max(4.0));
        assert!(rq.upper_uninformative);
    }

    #[test]
    fn missing_hypotheses_leave_sides_absent() {
        let hyp = Hypotheses {
            stabilizable: false,
            origin_interior: false,
            ..all_hyp()
        };
        let i = bound_tm(
            &scalar_pair(),
            &Vector::from_element(1, 1.0),
            0.5,
            0.5,
            &hyp,
        );
        assert!(i.lower.value().is_none() && i.upper.value().is_none());
        let i = bound_tn(&scalar_pair(), &Vector::from_element(1, 1.0), 1.0, None);
        assert!(i.upper.value().is_none());
    }

    fn fake(lower: f64, upper: f64) -> PairBounds {
        let iv = Interval {
            lower: Bound::Value(lower),
            upper: Bound::Value(upper),
        };
        PairBounds {
            x0_pnorm: 1.0,
            extremals: Extremals {
                b_max: 1.0,
                b_min: None,
                z_max: None,
                z_min: None,
            },
            tn: iv.clone(),
            tm: iv,
            rq: RqInterval {
                lower: Bound::Absent(String::new()),
                upper: Bound::Absent(String::new()),
                upper_uninformative: false,
            },
        }
    }

    #[test]
    fn best_bounds_picks_extremes() {
        let b = best_bounds(&[fake(3.0, 10.0), fake(5.0, 8.0)]).unwrap();
        assert_eq!(
            b.tm_lower,
            Some(Best {
                value: 5.0,
                pair_index: 1
            })
        );
        assert_eq!(
            b.tm_upper,
            Some(Best {
                value: 8.0,
                pair_index: 1
            })
        );
        assert!(b.rq_lower.is_none());
        let b = best_bounds(&[fake(3.0, 10.0)]).unwrap();
        assert_eq!(b.tn_lower.unwrap().value, 3.0);
        assert!(matches!(best_bounds(&[]), Err(Error::EmptyPairList)));
    }

    #[test]
    fn invalid_pairs_rejected() {
        let a = Matrix::from_element(1, 1, -1.0);
        let r = LyapunovPair::new(
            &a,
            Matrix::from_element(1, 1, 1.0),
            Matrix::from_element(1, 1, 3.0),
        );
        assert!(matches!(r, Err(Error::InvalidPair(_))));
    }

    #[test]
    fn bounds_ordered_and_monotone() {
        let a = Matrix::from_row_slice(2, 2, &[-1.0, 2.0, 0.0, -3.0]);
        let q = Matrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
        let pair = LyapunovPair::from_q(&a, q).unwrap();
        let mut prev = (0.0, 0.0);
        for s in [0.1, 0.5, 1.0, 4.0] {
            let x0 = Vector::from_column_slice(&[s, -0.5 * s]);
            let i = bound_tn(&pair, &x0, 2.0, Some(0.7));
            let (lo, hi) = (i.lower.value().unwrap(), i.upper.value().unwrap());
            assert!(lo <= hi);
            assert!(lo > prev.0 && hi > prev.1);
            prev = (lo, hi);
        }
    }
}
