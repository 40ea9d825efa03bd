//! Linear system `ẋ = Ax + B̄ū` with a designated set of lost actuators,
//! split as `ẋ = Ax + Bu + Cw`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{
    image_box, pontryagin_diff, vertices, zonotope_to_hrep, HPolytope, HyperBox, VPolytope,
    Zonotope,
};
use crate::linalg::{Matrix, Vector};

#[derive(Debug, Clone)]
pub struct LinearSystem {
    a: Matrix,
    b_bar: Matrix,
    inputs: HyperBox,
    lost: Vec<usize>,
}

impl LinearSystem {
    pub fn new(a: Matrix, b_bar: Matrix, half_widths: Vec<f64>, lost: Vec<usize>) -> Result<Self> {
        let n = a.nrows();
        if n == 0 || a.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "A is {}x{}, expected square",
                a.nrows(),
                a.ncols()
            )));
        }
        if b_bar.nrows() != n {
            return Err(Error::DimensionMismatch(format!(
                "B_bar has {} rows, A has {}",
                b_bar.nrows(),
                n
            )));
        }
        if half_widths.len() != b_bar.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "{} half-widths for {} inputs",
                half_widths.len(),
                b_bar.ncols()
            )));
        }
        if a.iter().chain(b_bar.iter()).any(|x| !x.is_finite()) {
            return Err(Error::DimensionMismatch("non-finite matrix entry".into()));
        }
        let mut sorted = lost.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != lost.len() {
            return Err(Error::DimensionMismatch(
                "repeated lost actuator index".into(),
            ));
        }
        if let Some(&i) = sorted.iter().find(|&&i| i >= b_bar.ncols()) {
            return Err(Error::DimensionMismatch(format!(
                "lost actuator {i} out of range"
            )));
        }
        if sorted.len() == b_bar.ncols() {
            return Err(Error::DimensionMismatch(
                "no actuator left under control".into(),
            ));
        }
        Ok(Self {
            a,
            b_bar,
            inputs: HyperBox::new(half_widths)?,
            lost: sorted,
        })
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b_bar(&self) -> &Matrix {
        &self.b_bar
    }

    pub fn inputs(&self) -> &HyperBox {
        &self.inputs
    }

    pub fn lost(&self) -> &[usize] {
        &self.lost
    }

    pub fn retained(&self) -> Vec<usize> {
        (0..self.b_bar.ncols())
            .filter(|i| !self.lost.contains(i))
            .collect()
    }

    fn columns(&self, idx: &[usize]) -> Matrix {
        Matrix::from_fn(self.n(), idx.len(), |r, c| self.b_bar[(r, idx[c])])
    }

    fn widths(&self, idx: &[usize]) -> HyperBox {
        let w = self.inputs.half_widths();
        HyperBox::new(idx.iter().map(|&i| w[i]).collect()).expect("validated widths")
    }

    /// Controlled input matrix `B`.
    pub fn b(&self) -> Matrix {
        self.columns(&self.retained())
    }

    /// Lost input matrix `C`.
    pub fn c(&self) -> Matrix {
        self.columns(&self.lost)
    }

    pub fn u_box(&self) -> HyperBox {
        self.widths(&self.retained())
    }

    pub fn w_box(&self) -> HyperBox {
        self.widths(&self.lost)
    }

    /// Same dynamics with the lost inputs' ranges scaled by `factor`.
    pub fn with_scaled_w(&self, factor: f64) -> Self {
        let mut w: Vec<f64> = self.inputs.half_widths().to_vec();
        for &i in &self.lost {
            w[i] *= factor;
        }
        Self {
            inputs: HyperBox::new(w).expect("non-negative scale"),
            ..self.clone()
        }
    }

    /// Same inputs, none of them lost.
    pub fn nominal(&self) -> Self {
        Self {
            lost: Vec::new(),
            ..self.clone()
        }
    }

    /// `B̄Ū`
    pub fn full_image(&self) -> Zonotope {
        image_box(&self.b_bar, &self.inputs).expect("validated dimensions")
    }

    /// `BU`
    pub fn bu(&self) -> Zonotope {
        image_box(&self.b(), &self.u_box()).expect("validated dimensions")
    }

    /// `CW`
    pub fn cw(&self) -> Zonotope {
        image_box(&self.c(), &self.w_box()).expect("validated dimensions")
    }

    /// Facets and vertices of `B̄Ū`; `None` when `rank(B̄) < n`.
    pub fn full_image_polytope(&self) -> Result<Option<Polytope>> {
        match zonotope_to_hrep(&self.full_image()) {
            Ok(h) => {
                let v = vertices(&h)?;
                Ok(Some(Polytope { hrep: h, vrep: v }))
            }
            Err(Error::DegenerateZonotope(_)) => Ok(None),
            Err(e) => Err(e),
        }
    }

    /// The dual control set `Z = BU ⊖ (−CW)`.
    pub fn dual_set(&self) -> Result<DualSet> {
        let bu = match zonotope_to_hrep(&self.bu()) {
            Ok(h) => h,
            Err(Error::DegenerateZonotope(_)) => {
                return Ok(DualSet {
                    bu: None,
                    z: None,
                    degenerate: true,
                })
            }
            Err(e) => return Err(e),
        };
        let diff = pontryagin_diff(&bu, &self.cw().negated())?;
        let z = match vertices(&diff.set) {
            Ok(v) => Some(Polytope {
                hrep: diff.set,
                vrep: v,
            }),
            Err(Error::DegenerateSet(_)) | Err(Error::UnboundedSet) if diff.degenerate => None,
            Err(e) => return Err(e),
        };
        Ok(DualSet {
            bu: Some(bu),
            z,
            degenerate: diff.degenerate,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Polytope {
    pub hrep: HPolytope,
    pub vrep: VPolytope,
}

impl Polytope {
    pub fn facet_count(&self) -> usize {
        self.hrep.facets().len()
    }

    pub fn vertex_count(&self) -> usize {
        self.vrep.vertices().len()
    }

    /// Every point of the set is inside `{‖x‖ ≤ r}` with this `r`.
    pub fn radius(&self) -> f64 {
        self.vrep
            .vertices()
            .iter()
            .map(Vector::norm)
            .fold(0.0, f64::max)
    }
}

/// `Z` together with the facets of `BU` it was cut from.
#[derive(Debug, Clone, Serialize)]
pub struct DualSet {
    /// `None` when `rank(B) < n`.
    pub bu: Option<HPolytope>,
    /// `None` when the difference is empty or has no interior.
    pub z: Option<Polytope>,
    /// Some facet offset of `Z` is non-positive.
    pub degenerate: bool,
}

impl DualSet {
    /// `0 ∈ int(Z)` at the given offset tolerance.
    pub fn origin_interior(&self, tol: f64) -> bool {
        self.z.as_ref().is_some_and(|z| z.hrep.min_offset() > tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar() -> LinearSystem {
        LinearSystem::new(
            Matrix::from_element(1, 1, -1.0),
            Matrix::from_row_slice(1, 2, &[1.0, 0.5]),
            vec![1.0, 1.0],
            vec![1],
        )
        .unwrap()
    }

    #[test]
    fn split_columns() {
        let s = scalar();
        assert_eq!(s.b(), Matrix::from_element(1, 1, 1.0));
        assert_eq!(s.c(), Matrix::from_element(1, 1, 0.5));
        assert_eq!(s.retained(), vec![0]);
    }

    #[test]
    fn scalar_dual_set() {
        let d = scalar().dual_set().unwrap();
        let z = d.z.unwrap();
        assert!(!d.degenerate);
        assert_eq!(z.facet_count(), 2);
        assert!((z.hrep.min_offset() - 0.5).abs() < 1e-12);
        assert!((z.radius() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_indices() {
        let a = Matrix::from_element(1, 1, -1.0);
        let b = Matrix::from_row_slice(1, 2, &[1.0, 0.5]);
        assert!(LinearSystem::new(a.clone(), b.clone(), vec![1.0; 2], vec![2]).is_err());
        assert!(LinearSystem::new(a.clone(), b.clone(), vec![1.0; 2], vec![1, 1]).is_err());
        assert!(LinearSystem::new(a, b, vec![1.0; 2], vec![0, 1]).is_err());
    }

    #[test]
    fn overwhelmed_controls_give_degenerate_z() {
        let s = LinearSystem::new(
            Matrix::from_element(1, 1, -1.0),
            Matrix::from_row_slice(1, 2, &[1.0, 2.0]),
            vec![1.0, 1.0],
            vec![1],
        )
        .unwrap();
        let d = s.dual_set().unwrap();
        assert!(d.degenerate);
        assert!(d.z.is_none());
        assert!(!d.origin_interior(1e-9));
    }

    #[test]
    fn rank_deficient_b() {
        let s = LinearSystem::new(
            -Matrix::identity(2, 2),
            Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]),
            vec![1.0, 1.0],
            vec![1],
        )
        .unwrap();
        let d = s.dual_set().unwrap();
        assert!(d.bu.is_none() && d.z.is_none());
    }
}
