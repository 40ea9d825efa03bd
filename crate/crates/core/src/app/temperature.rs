//! Three-room temperature model. States are temperature offsets from the
//! target temperature, in kelvin.

use std::str::FromStr;

use serde::Serialize;

use super::spec::{AnalysisOptions, SystemSpec};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

/// Input columns, in order.
pub const INPUT_NAMES: [&str; 7] = ["sl1", "sl2", "sl3", "dw1", "dw2", "dw3", "hac"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TemperatureParams {
    /// Wall area, m².
    pub a: f64,
    /// J/K
    pub m_cp: f64,
    /// W/K
    pub u_g1: f64,
    pub u_12: f64,
    pub u_23: f64,
    pub u_3g: f64,
    /// W
    pub q_hac: f64,
    pub q_dw: f64,
    pub q_sl: f64,
    /// K
    pub t_goal: f64,
    /// Scale the conduction terms by the wall area. Without it the drift is
    /// about ten times slower than the reported spectrum, with it the reach
    /// times line up.
    pub include_wall_area: bool,
}

impl Default for TemperatureParams {
    fn default() -> Self {
        Self {
            a: 12.0,
            m_cp: 42186.0,
            u_g1: 6.27,
            u_12: 5.08,
            u_23: 5.41,
            u_3g: 6.27,
            q_hac: 350.0,
            q_dw: 300.0,
            q_sl: 200.0,
            t_goal: 293.0,
            include_wall_area: true,
        }
    }
}

impl TemperatureParams {
    fn validate(&self) -> Result<()> {
        let vals = [
            ("a", self.a),
            ("m_cp", self.m_cp),
            ("u_g1", self.u_g1),
            ("u_12", self.u_12),
            ("u_23", self.u_23),
            ("u_3g", self.u_3g),
            ("q_hac", self.q_hac),
            ("q_dw", self.q_dw),
            ("q_sl", self.q_sl),
            ("t_goal", self.t_goal),
        ];
        match vals.iter().find(|(_, v)| !(*v > 0.0 && v.is_finite())) {
            Some((name, _)) => Err(Error::Schema {
                pointer: format!("/{name}"),
                message: "must be positive".into(),
            }),
            None => Ok(()),
        }
    }

    /// Drift `A`, input matrix `B̄` and constant-term vector `D` of
    /// `Ṫ = AT + B̄ū + D·T_goal`.
    pub fn matrices(&self) -> (Matrix, Matrix, Vector) {
        let area = if self.include_wall_area { self.a } else { 1.0 };
        let s = area / self.m_cp;
        let (g1, u12, u23, g3) = (self.u_g1, self.u_12, self.u_23, self.u_3g);
        #[rustfmt::skip]
        let a = Matrix::from_row_slice(3, 3, &[
            -g1 - u12, u12, 0.0,
            u12, -u12 - u23, u23,
            0.0, u23, -u23 - g3,
        ]) * s;
        let (sl, dw, hac) = (self.q_sl, self.q_dw, self.q_hac);
        #[rustfmt::skip]
        let b = Matrix::from_row_slice(3, 7, &[
            sl, 0.0, 0.0, dw, 0.0, 0.0, hac,
            0.0, sl, 0.0, 0.0, dw, 0.0, hac,
            0.0, 0.0, sl, 0.0, 0.0, dw, hac,
        ]) / self.m_cp;
        let d = Vector::from_column_slice(&[g1, 0.0, g3]) * s;
        (a, b, d)
    }
}

/// Named loss scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TemperatureLoss {
    Dw1,
    Hac,
}

impl TemperatureLoss {
    pub fn column(self) -> usize {
        match self {
            TemperatureLoss::Dw1 => 3,
            TemperatureLoss::Hac => 6,
        }
    }
}

impl FromStr for TemperatureLoss {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "dw1" => Ok(TemperatureLoss::Dw1),
            "hac" => Ok(TemperatureLoss::Hac),
            _ => Err(format!("unknown actuator {s:?} (expected dw1 or hac)")),
        }
    }
}

pub const DEFAULT_X0: [f64; 3] = [0.8, 0.7, 0.9];

pub fn build_temperature_system(p: &TemperatureParams, lost: &[usize]) -> Result<SystemSpec> {
    p.validate()?;
    let (a, b, d) = p.matrices();
    // In offset coordinates the constant term has to vanish: D + A·1 = 0.
    let residual = (&d + &a * Vector::from_element(3, 1.0)).amax();
    assert!(
        residual <= 1e-12 * a.amax(),
        "constant term does not cancel: {residual:e}"
    );
    let rows = |m: &Matrix| {
        (0..m.nrows())
            .map(|i| m.row(i).iter().copied().collect())
            .collect()
    };
    Ok(SystemSpec {
        n: 3,
        a: rows(&a),
        b_bar: rows(&b),
        half_widths: vec![1.0; 7],
        lost_actuators: lost.to_vec(),
        x0: DEFAULT_X0.to_vec(),
        options: AnalysisOptions::default(),
    })
}

/// Spectrum reported alongside the model, for comparison with the computed one.
pub const REFERENCE_EIGENVALUES: [f64; 3] = [-0.052, -0.033, -0.010];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::symmetric_eigenvalues;

    #[test]
    fn input_matrix_entries() {
        let s = build_temperature_system(&TemperatureParams::default(), &[3]).unwrap();
        assert!((s.b_bar[0][6] - 350.0 / 42186.0).abs() < 1e-15);
        assert!((s.b_bar[0][6] - 8.297e-3).abs() < 1e-6);
        let sys = s.system().unwrap();
        let c = sys.c();
        assert_eq!(c.ncols(), 1);
        assert!((c[(0, 0)] - 300.0 / 42186.0).abs() < 1e-15);
        assert_eq!(c[(1, 0)], 0.0);

        let s = build_temperature_system(&TemperatureParams::default(), &[6]).unwrap();
        let c = s.system().unwrap().c();
        assert!(c.iter().all(|&x| (x - 350.0 / 42186.0).abs() < 1e-15));
    }

    #[test]
    fn spectrum_scales_with_area() {
        let p = TemperatureParams::default();
        let e = symmetric_eigenvalues(&p.matrices().0);
        let e1 = symmetric_eigenvalues(
            &TemperatureParams {
                include_wall_area: false,
                ..p
            }
            .matrices()
            .0,
        );
        for (x, y) in e.iter().zip(&e1) {
            assert!((x / y - 12.0).abs() < 1e-9);
        }
        assert!(e.iter().all(|&x| x < 0.0));
        // Hand-computed trace: −(6.27 + 2·5.08 + 2·5.41 + 6.27)·12/42186.
        let tr: f64 = e.iter().sum();
        assert!((tr + 33.52 * 12.0 / 42186.0).abs() < 1e-12);
    }

    #[test]
    fn loss_names() {
        assert_eq!("dw1".parse::<TemperatureLoss>().unwrap().column(), 3);
        assert_eq!("HAC".parse::<TemperatureLoss>().unwrap().column(), 6);
        assert!("x".parse::<TemperatureLoss>().is_err());
    }

    #[test]
    fn rejects_non_positive_params() {
        let p = TemperatureParams {
            m_cp: 0.0,
            ..Default::default()
        };
        assert!(build_temperature_system(&p, &[3]).is_err());
    }
}
