//! Small dense LPs over free variables, `max cᵀx s.t. Gx ≤ h`.

use minilp::{ComparisonOp, OptimizationDirection, Problem};

use crate::error::{Error, Result};
use crate::linalg::Vector;

pub(crate) fn maximize(c: &[f64], rows: &[(&[f64], f64)]) -> Result<(f64, Vector)> {
    let n = c.len();
    let mut problem = Problem::new(OptimizationDirection::Maximize);
    let vars: Vec<_> = c
        .iter()
        .map(|ci| problem.add_var(*ci, (f64::NEG_INFINITY, f64::INFINITY)))
        .collect();
    for (a, b) in rows {
        let expr: Vec<_> = vars.iter().copied().zip(a.iter().copied()).collect();
        problem.add_constraint(expr.as_slice(), ComparisonOp::Le, *b);
    }
    match problem.solve() {
        Ok(sol) if !sol.objective().is_finite() => Err(Error::UnboundedSet),
        Ok(sol) => {
            let x = Vector::from_iterator(n, vars.iter().map(|v| sol[*v]));
            Ok((sol.objective(), x))
        }
        Err(minilp::Error::Unbounded) => Err(Error::UnboundedSet),
        Err(minilp::Error::Infeasible) => {
            Err(Error::DegenerateSet("infeasible constraints".into()))
        }
    }
}

/// Finds some point of `{x : lo ≤ x ≤ hi, Ex = f}` (equalities relaxed by `tol`).
pub(crate) fn feasible_in_box(
    e: &[Vec<f64>],
    f: &[f64],
    lo: &[f64],
    hi: &[f64],
    tol: f64,
) -> Option<Vector> {
    let n = lo.len();
    let mut problem = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<_> = (0..n)
        .map(|i| problem.add_var(0.0, (lo[i], hi[i])))
        .collect();
    for (row, rhs) in e.iter().zip(f) {
        let expr: Vec<_> = vars.iter().copied().zip(row.iter().copied()).collect();
        problem.add_constraint(expr.as_slice(), ComparisonOp::Le, rhs + tol);
        problem.add_constraint(expr.as_slice(), ComparisonOp::Ge, rhs - tol);
    }
    let sol = problem.solve().ok()?;
    Some(Vector::from_iterator(n, vars.iter().map(|v| sol[*v])))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_support() {
        let rows: Vec<(Vec<f64>, f64)> = vec![
            (vec![1.0, 0.0], 1.0),
            (vec![-1.0, 0.0], 1.0),
            (vec![0.0, 1.0], 2.0),
            (vec![0.0, -1.0], 2.0),
        ];
        let r: Vec<(&[f64], f64)> = rows.iter().map(|(a, b)| (a.as_slice(), *b)).collect();
        let (v, x) = maximize(&[1.0, 1.0], &r).unwrap();
        assert!((v - 3.0).abs() < 1e-9);
        assert!((x[0] - 1.0).abs() < 1e-9 && (x[1] - 2.0).abs() < 1e-9);
        assert!(matches!(
            maximize(&[1.0, 0.0], &r[1..]),
            Err(Error::UnboundedSet)
        ));
    }
}
