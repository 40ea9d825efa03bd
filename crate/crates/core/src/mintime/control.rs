//! Bang-bang control reconstruction from the optimal adjoint, and RK4
//! verification.

use serde::Serialize;

use super::{ControlSet, MinTimeResult};
use crate::error::{Error, Result};
use crate::geometry::{lp, VPolytope};
use crate::linalg::{expm, Matrix, Vector};
use crate::system::LinearSystem;

/// Constant `value` on `[start, end)`.
#[derive(Debug, Clone, Serialize)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub value: Vector,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ControlLaw {
    pub segments: Vec<Segment>,
}

impl ControlLaw {
    pub fn at(&self, t: f64) -> Option<&Vector> {
        let i = self.segments.partition_point(|s| s.end <= t);
        self.segments
            .get(i)
            .or_else(|| self.segments.last())
            .map(|s| &s.value)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Reconstruction {
    /// Controlled inputs `u(t)` (every input in the nominal case).
    pub u: ControlLaw,
    /// Worst-case lost inputs `w(t)`; empty in the nominal case.
    pub w: ControlLaw,
    /// State-space forcing `Bu + Cw`.
    pub forcing: ControlLaw,
    pub switches: Vec<f64>,
    /// Segments where least squares left the box and an LP found `u`.
    pub lp_fallbacks: usize,
    /// Largest violation of the input box by the returned `u`.
    pub max_excess: f64,
    pub sample_count: usize,
}

/// `p(t) = e^{−Aᵀt}η`
fn adjoint(a: &Matrix, eta: &Vector, t: f64) -> Vector {
    expm(&a.transpose(), -t) * eta
}

fn sign_mask(m: &Matrix, p: &Vector) -> u64 {
    m.column_iter().enumerate().fold(
        0,
        |acc, (i, c)| {
            if c.dot(p) >= 0.0 {
                acc | 1 << i
            } else {
                acc
            }
        },
    )
}

/// Instants on `(0, T)` where the key of the exposed face changes, from a
/// uniform grid refined by bisection.
fn switching_times<K: PartialEq>(t_end: f64, samples: usize, key: impl Fn(f64) -> K) -> Vec<f64> {
    let mut out = Vec::new();
    let h = t_end / samples as f64;
    let mut prev = key(0.0);
    for i in 1..=samples {
        let t = i as f64 * h;
        let cur = key(t);
        if cur != prev {
            let (mut lo, mut hi) = (t - h, t);
            let klo = key(lo);
            while hi - lo > 1e-13 * t_end.max(1e-300) {
                let mid = 0.5 * (lo + hi);
                if key(mid) == klo {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            out.push(0.5 * (lo + hi));
            prev = cur;
        }
    }
    out
}

/// Optimal open-loop signals for a solved problem.
///
/// With `z = None` the problem is the nominal one (control set `B̄Ū`).
/// Otherwise the control set is `Z` and the worst-case `w` together with
/// the matching `u` (`Bu = z − Cw`) are recovered.
pub fn reconstruct_controls(
    result: &MinTimeResult,
    sys: &LinearSystem,
    z: Option<&VPolytope>,
    samples: usize,
) -> Result<Reconstruction> {
    let t_end = result.t_star;
    let samples = samples.max(2000);
    let a = sys.a();
    let eta = &result.eta_star;
    match z {
        None => {
            let bb = sys.b_bar();
            let widths = sys.inputs().half_widths().to_vec();
            let switches = switching_times(t_end, samples, |t| sign_mask(bb, &adjoint(a, eta, t)));
            let mut u = ControlLaw::default();
            let mut forcing = ControlLaw::default();
            for (start, end) in cuts(t_end, &switches) {
                let p = adjoint(a, eta, 0.5 * (start + end));
                let ui = Vector::from_fn(widths.len(), |i, _| {
                    if bb.column(i).dot(&p) >= 0.0 {
                        widths[i]
                    } else {
                        -widths[i]
                    }
                });
                forcing.segments.push(Segment {
                    start,
                    end,
                    value: bb * &ui,
                });
                u.segments.push(Segment {
                    start,
                    end,
                    value: ui,
                });
            }
            Ok(Reconstruction {
                u,
                w: ControlLaw::default(),
                forcing,
                switches,
                lp_fallbacks: 0,
                max_excess: 0.0,
                sample_count: samples,
            })
        }
        Some(zv) => {
            let b = sys.b();
            let c = sys.c();
            let uw = sys.u_box().half_widths().to_vec();
            let ww = sys.w_box().half_widths().to_vec();
            let zset = ControlSet::Vertices(zv.clone());
            let switches = switching_times(t_end, samples, |t| {
                let p = adjoint(a, eta, t);
                (zset.face(&p), sign_mask(&c, &p))
            });
            let svd = b.clone().svd(true, true);
            let mut out = Reconstruction {
                u: ControlLaw::default(),
                w: ControlLaw::default(),
                forcing: ControlLaw::default(),
                switches: switches.clone(),
                lp_fallbacks: 0,
                max_excess: 0.0,
                sample_count: samples,
            };
            for (start, end) in cuts(t_end, &switches) {
                let mid = 0.5 * (start + end);
                let p = adjoint(a, eta, mid);
                let zstar = zset.support_point(&p);
                // The lost inputs push against p: maximize −pᵀCw.
                let w = Vector::from_fn(ww.len(), |j, _| {
                    if c.column(j).dot(&p) >= 0.0 {
                        -ww[j]
                    } else {
                        ww[j]
                    }
                });
                let rhs = &zstar - &c * &w;
                let mut u = svd
                    .solve(&rhs, 1e-12)
                    .map_err(|e| Error::NonConvergence(e.to_string()))?;
                let excess = box_excess(&u, &uw);
                if excess > 1e-6 {
                    let rows: Vec<Vec<f64>> =
                        b.row_iter().map(|r| r.iter().copied().collect()).collect();
                    let lo: Vec<f64> = uw.iter().map(|w| -w).collect();
                    let tol = 1e-9 * (1.0 + rhs.amax());
                    match lp::feasible_in_box(&rows, rhs.as_slice(), &lo, &uw, tol) {
                        Some(x) => {
                            u = x;
                            out.lp_fallbacks += 1;
                        }
                        None => return Err(Error::ControlOutOfRange { time: mid, excess }),
                    }
                }
                out.max_excess = out.max_excess.max(box_excess(&u, &uw));
                out.forcing.segments.push(Segment {
                    start,
                    end,
                    value: &b * &u + &c * &w,
                });
                out.u.segments.push(Segment {
                    start,
                    end,
                    value: u,
                });
                out.w.segments.push(Segment {
                    start,
                    end,
                    value: w,
                });
            }
            Ok(out)
        }
    }
}

fn box_excess(u: &Vector, widths: &[f64]) -> f64 {
    u.iter()
        .zip(widths)
        .map(|(x, w)| (x.abs() - w).max(0.0))
        .fold(0.0, f64::max)
}

fn cuts(t_end: f64, switches: &[f64]) -> Vec<(f64, f64)> {
    let mut pts = vec![0.0];
    pts.extend(switches.iter().copied());
    pts.push(t_end);
    pts.windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| (w[0], w[1]))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vector>,
    pub terminal_error: f64,
}

/// Classical RK4 for `ẋ = Ax + v(t)` with `v` piecewise constant, restarting
/// at every segment boundary.
pub fn simulate(
    a: &Matrix,
    forcing: &ControlLaw,
    x0: &Vector,
    t_end: f64,
    max_step: f64,
) -> Trajectory {
    let mut x = x0.clone();
    let mut times = vec![0.0];
    let mut states = vec![x.clone()];
    let zero = Vector::zeros(x0.len());
    let mut bounds: Vec<(f64, f64, &Vector)> = forcing
        .segments
        .iter()
        .filter(|s| s.start < t_end)
        .map(|s| (s.start, s.end.min(t_end), &s.value))
        .collect();
    if bounds.is_empty() {
        bounds.push((0.0, t_end, &zero));
    }
    if let Some(last) = bounds.last_mut() {
        last.1 = t_end;
    }
    for (start, end, v) in bounds {
        if end <= start {
            continue;
        }
        let mut t = start;
        let steps = ((end - start) / max_step).ceil().max(1.0) as usize;
        let h = (end - start) / steps as f64;
        let f = |x: &Vector| a * x + v;
        for _ in 0..steps {
            let k1 = f(&x);
            let k2 = f(&(&x + &k1 * (0.5 * h)));
            let k3 = f(&(&x + &k2 * (0.5 * h)));
            let k4 = f(&(&x + &k3 * h));
            x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
            t += h;
            times.push(t);
            states.push(x.clone());
        }
    }
    Trajectory {
        times,
        terminal_error: x.norm(),
        states,
    }
}

#[cfg(test)]
mod tests {
    use super::super::tests::double_integrator;
    use super::super::{min_time, MinTimeOptions, MinTimeProblem};
    use super::*;

    #[test]
    fn free_decay() {
        let tr = simulate(
            &-Matrix::identity(2, 2),
            &ControlLaw::default(),
            &Vector::from_column_slice(&[1.0, 0.0]),
            1.0,
            1e-3,
        );
        let x = tr.states.last().unwrap();
        assert!((x[0] - (-1f64).exp()).abs() < 1e-9);
        assert!(x[1].abs() < 1e-15);
    }

    fn scalar_sys() -> LinearSystem {
        LinearSystem::new(
            Matrix::from_element(1, 1, -1.0),
            Matrix::from_row_slice(1, 2, &[1.0, 0.5]),
            vec![1.0, 1.0],
            vec![1],
        )
        .unwrap()
    }

    #[test]
    fn scalar_nominal_control() {
        let sys = LinearSystem::new(
            Matrix::from_element(1, 1, -1.0),
            Matrix::from_element(1, 1, 1.0),
            vec![1.0],
            vec![],
        )
        .unwrap();
        let prob = MinTimeProblem {
            a: sys.a().clone(),
            control_set: ControlSet::Zonotope(sys.full_image()),
            x0: Vector::from_element(1, 1.0),
            disturbance: None,
            options: MinTimeOptions {
                rel_time_tol: 1e-10,
                ..Default::default()
            },
        };
        let r = min_time(&prob).unwrap();
        let rec = reconstruct_controls(&r, &sys, None, 2000).unwrap();
        assert!(rec.switches.is_empty());
        assert_eq!(rec.u.segments.len(), 1);
        assert_eq!(rec.u.segments[0].value[0], -1.0);
        let tr = simulate(sys.a(), &rec.forcing, &prob.x0, r.t_star, 1e-4);
        assert!(tr.terminal_error <= 1e-6, "{}", tr.terminal_error);
    }

    #[test]
    fn scalar_malfunction_control() {
        let sys = scalar_sys();
        let dual = sys.dual_set().unwrap();
        let z = dual.z.unwrap();
        let prob = MinTimeProblem {
            a: sys.a().clone(),
            control_set: ControlSet::Vertices(z.vrep.clone()),
            x0: Vector::from_element(1, 1.0),
            disturbance: None,
            options: MinTimeOptions {
                rel_time_tol: 1e-10,
                ..Default::default()
            },
        };
        let r = min_time(&prob).unwrap();
        assert!((r.t_star - 3f64.ln()).abs() < 1e-6);
        let rec = reconstruct_controls(&r, &sys, Some(&z.vrep), 2000).unwrap();
        let seg = &rec.u.segments[0];
        assert!((seg.value[0] + 1.0).abs() < 1e-12);
        assert!((rec.w.segments[0].value[0] - 1.0).abs() < 1e-12);
        assert!((rec.forcing.segments[0].value[0] + 0.5).abs() < 1e-12);
        let tr = simulate(sys.a(), &rec.forcing, &prob.x0, r.t_star, 1e-4);
        assert!(tr.terminal_error <= 1e-6);
    }

    #[test]
    fn double_integrator_switches_once() {
        let prob = double_integrator();
        let r = min_time(&prob).unwrap();
        let sys = LinearSystem::new(
            prob.a.clone(),
            Matrix::from_column_slice(2, 1, &[0.0, 1.0]),
            vec![1.0],
            vec![],
        )
        .unwrap();
        let rec = reconstruct_controls(&r, &sys, None, 4000).unwrap();
        assert_eq!(rec.switches.len(), 1);
        assert!((rec.switches[0] - 1.0).abs() < 1e-3, "{:?}", rec.switches);
        let tr = simulate(&prob.a, &rec.forcing, &prob.x0, r.t_star, 1e-4);
        assert!(tr.terminal_error <= 1e-2, "{}", tr.terminal_error);
    }

    #[test]
    fn control_law_lookup() {
        let law = ControlLaw {
            segments: vec![
                Segment {
                    start: 0.0,
                    end: 1.0,
                    value: Vector::from_element(1, 1.0),
                },
                Segment {
                    start: 1.0,
                    end: 2.0,
                    value: Vector::from_element(1, -1.0),
                },
            ],
        };
        assert_eq!(law.at(0.5).unwrap()[0], 1.0);
        assert_eq!(law.at(1.0).unwrap()[0], -1.0);
        assert_eq!(law.at(5.0).unwrap()[0], -1.0);
    }
}
