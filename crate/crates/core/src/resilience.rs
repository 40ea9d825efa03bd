//! Resilience and resilient stabilizability verdicts with certificates.

use serde::Serialize;

use crate::geometry::contains_in_interior;
use crate::linalg::{norm_inf, rank, spectrum, Spectrum};
use crate::system::{DualSet, LinearSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Ternary {
    Yes,
    No,
    Undecided,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    None,
    Spectrum {
        /// `[re, im]` pairs.
        eigenvalues: Vec<[f64; 2]>,
        max_real: f64,
    },
    Offset {
        min_offset: f64,
        facet_index: usize,
    },
    Eigenvector {
        eigenvalue: f64,
        vector: Vec<f64>,
        /// `max {vᵀz : z ∈ Z}` for this signed eigenvector.
        max_over_z: f64,
    },
    Reason {
        reason: String,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct Condition {
    pub name: String,
    pub status: Status,
    pub certificate: Certificate,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResilienceVerdict {
    pub resilient: Ternary,
    pub stabilizable: Ternary,
    pub conditions: Vec<Condition>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Tolerances {
    /// Threshold on real parts of eigenvalues.
    pub eig: f64,
    /// Threshold on normalized facet offsets.
    pub offset: f64,
}

impl Tolerances {
    pub fn for_system(sys: &LinearSystem) -> Self {
        Self {
            eig: 1e-7 * (1.0 + norm_inf(sys.a())),
            offset: 1e-9,
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Target {
    /// All real parts zero.
    Resilient,
    /// All real parts non-positive.
    Stabilizable,
}

fn spectrum_certificate(spec: &Spectrum) -> Certificate {
    Certificate::Spectrum {
        eigenvalues: spec.eigenvalues.iter().map(|l| [l.re, l.im]).collect(),
        max_real: spec.max_real(),
    }
}

fn cond(name: &str, status: Status, certificate: Certificate) -> Condition {
    Condition {
        name: name.to_string(),
        status,
        certificate,
    }
}

fn evaluate(
    sys: &LinearSystem,
    dual: &DualSet,
    tol: Tolerances,
    target: Target,
) -> (Ternary, Vec<Condition>) {
    let mut conditions = Vec::new();
    let spec = spectrum(sys.a(), tol.eig);
    let label = match target {
        Target::Resilient => "spectrum_marginal",
        Target::Stabilizable => "spectrum_semistable",
    };

    // Hypotheses: 0 ∈ Z and int(Z) ≠ ∅.
    let z = match &dual.z {
        Some(z) if z.hrep.min_offset() >= -tol.offset => z,
        _ => {
            let reason = if dual.bu.is_none() {
                "rank(B) < n: Z has empty interior".to_string()
            } else if dual.z.is_none() {
                "Z is empty or has empty interior".to_string()
            } else {
                "origin is outside Z".to_string()
            };
            conditions.push(cond(
                "hypotheses",
                Status::Fail,
                Certificate::Reason { reason },
            ));
            return (Ternary::Undecided, conditions);
        }
    };
    conditions.push(cond("hypotheses", Status::Pass, Certificate::None));

    let spectral_ok = match target {
        Target::Resilient => spec.marginal,
        Target::Stabilizable => spec.semistable,
    };
    conditions.push(cond(
        label,
        if spectral_ok {
            Status::Pass
        } else {
            Status::Fail
        },
        spectrum_certificate(&spec),
    ));

    let (facet_index, min_offset) = z
        .hrep
        .facets()
        .iter()
        .enumerate()
        .map(|(i, f)| (i, f.offset))
        .fold(
            (0, f64::INFINITY),
            |acc, x| if x.1 < acc.1 { x } else { acc },
        );
    let interior = min_offset > tol.offset;
    conditions.push(cond(
        "origin_interior",
        if interior { Status::Pass } else { Status::Fail },
        Certificate::Offset {
            min_offset,
            facet_index,
        },
    ));

    // Eigenvector test over both orientations of each real eigenvector.
    let mut eig_ok = true;
    for ev in &spec.real_eigenvectors {
        for sign in [1.0, -1.0] {
            let v: Vec<f64> = ev.vector.iter().map(|x| sign * x).collect();
            let max_over_z = z
                .vrep
                .vertices()
                .iter()
                .map(|p| p.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>())
                .fold(f64::NEG_INFINITY, f64::max);
            let pass = max_over_z > tol.offset;
            eig_ok &= pass;
            conditions.push(cond(
                "eigenvector_escape",
                if pass { Status::Pass } else { Status::Fail },
                Certificate::Eigenvector {
                    eigenvalue: ev.eigenvalue,
                    vector: v,
                    max_over_z,
                },
            ));
        }
    }
    if spec.real_eigenvectors.is_empty() {
        conditions.push(cond(
            "eigenvector_escape",
            Status::NotApplicable,
            Certificate::Reason {
                reason: "no real eigenvectors of A^T".into(),
            },
        ));
    }

    let verdict = if spectral_ok && (interior || eig_ok) {
        Ternary::Yes
    } else {
        Ternary::No
    };
    (verdict, conditions)
}

/// Resilience: marginal spectrum and no real eigenvector of `Aᵀ` with
/// `vᵀz ≤ 0` on all of `Z`.
pub fn check_resilient(sys: &LinearSystem, dual: &DualSet, tol: Tolerances) -> ResilienceVerdict {
    let (resilient, conditions) = evaluate(sys, dual, tol, Target::Resilient);
    ResilienceVerdict {
        resilient,
        stabilizable: Ternary::Undecided,
        conditions,
    }
}

/// Resilient stabilizability: as `check_resilient` with `Re λ ≤ 0`.
pub fn check_stabilizable(
    sys: &LinearSystem,
    dual: &DualSet,
    tol: Tolerances,
) -> ResilienceVerdict {
    let (stabilizable, conditions) = evaluate(sys, dual, tol, Target::Stabilizable);
    ResilienceVerdict {
        resilient: Ternary::Undecided,
        stabilizable,
        conditions,
    }
}

/// Both verdicts, with the conditions of both checks.
pub fn check_all(sys: &LinearSystem, dual: &DualSet, tol: Tolerances) -> ResilienceVerdict {
    let r = check_resilient(sys, dual, tol);
    let s = check_stabilizable(sys, dual, tol);
    let mut conditions = r.conditions;
    conditions.extend(
        s.conditions
            .into_iter()
            .filter(|c| c.name == "spectrum_semistable"),
    );
    ResilienceVerdict {
        resilient: r.resilient,
        stabilizable: s.stabilizable,
        conditions,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FullActuation {
    pub holds: bool,
    pub rank_b: usize,
    /// Radius of the ball that fits around `−CW` inside `BU`.
    pub delta: f64,
    pub facet_index: Option<usize>,
}

/// Sufficient condition for `0 ∈ int(Z)`: `rank(B) = n` and `−CW ⊆ int(BU)`.
pub fn check_full_actuation(sys: &LinearSystem, dual: &DualSet, tol: Tolerances) -> FullActuation {
    let rank_b = rank(&sys.b(), 1e-10);
    match &dual.bu {
        Some(bu) if rank_b == sys.n() => {
            let c = contains_in_interior(&sys.cw().negated(), bu, tol.offset);
            FullActuation {
                holds: c.contained,
                rank_b,
                delta: c.min_slack,
                facet_index: Some(c.facet_index),
            }
        }
        _ => FullActuation {
            holds: false,
            rank_b,
            delta: 0.0,
            facet_index: None,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;

    fn sys(a: Matrix, b_bar: Matrix, lost: Vec<usize>) -> LinearSystem {
        let k = b_bar.ncols();
        LinearSystem::new(a, b_bar, vec![1.0; k], lost).unwrap()
    }

    fn verdicts(s: &LinearSystem) -> ResilienceVerdict {
        let d = s.dual_set().unwrap();
        check_all(s, &d, Tolerances::for_system(s))
    }

    #[test]
    fn driftless_with_margin_is_resilient() {
        let s = sys(
            Matrix::zeros(2, 2),
            Matrix::from_row_slice(2, 3, &[1.0, 0.0, 0.5, 0.0, 1.0, 0.0]),
            vec![2],
        );
        let v = verdicts(&s);
        assert_eq!(v.resilient, Ternary::Yes);
        assert_eq!(v.stabilizable, Ternary::Yes);
    }

    #[test]
    fn rotation_is_resilient() {
        let s = sys(
            Matrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]),
            Matrix::identity(2, 2),
            vec![],
        );
        assert_eq!(verdicts(&s).resilient, Ternary::Yes);
    }

    #[test]
    fn unstable_scalar_not_stabilizable() {
        let s = sys(
            Matrix::from_element(1, 1, 1.0),
            Matrix::from_row_slice(1, 2, &[1.0, 0.5]),
            vec![1],
        );
        let v = verdicts(&s);
        assert_eq!(v.stabilizable, Ternary::No);
        assert_eq!(v.resilient, Ternary::No);
    }

    #[test]
    fn hurwitz_is_stabilizable_not_resilient() {
        let s = sys(-Matrix::identity(2, 2), Matrix::identity(2, 2), vec![]);
        let v = verdicts(&s);
        assert_eq!(v.stabilizable, Ternary::Yes);
        assert_eq!(v.resilient, Ternary::No);
    }

    #[test]
    fn lost_hypotheses_give_undecided() {
        let s = sys(
            Matrix::from_element(1, 1, -1.0),
            Matrix::from_row_slice(1, 2, &[1.0, 2.0]),
            vec![1],
        );
        let v = verdicts(&s);
        assert_eq!(v.stabilizable, Ternary::Undecided);
        assert_eq!(v.resilient, Ternary::Undecided);
    }

    #[test]
    fn flat_z_is_undecided() {
        // The lost input cancels all authority along the second axis.
        let s = sys(
            Matrix::zeros(2, 2),
            Matrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 1.0]),
            vec![2],
        );
        let v = verdicts(&s);
        assert_eq!(v.resilient, Ternary::Undecided);
        assert_eq!(v.stabilizable, Ternary::Undecided);
    }

    #[test]
    fn full_actuation_cases() {
        let s = sys(
            -Matrix::identity(2, 2),
            Matrix::from_row_slice(2, 3, &[1.0, 0.0, 0.5, 0.0, 1.0, 0.0]),
            vec![2],
        );
        let d = s.dual_set().unwrap();
        let f = check_full_actuation(&s, &d, Tolerances::for_system(&s));
        assert!(f.holds);
        assert!((f.delta - 0.5).abs() < 1e-12);

        let s = sys(
            -Matrix::identity(2, 2),
            Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]),
            vec![1],
        );
        let d = s.dual_set().unwrap();
        let f = check_full_actuation(&s, &d, Tolerances::for_system(&s));
        assert!(!f.holds);
        assert_eq!(f.rank_b, 1);
    }
}
