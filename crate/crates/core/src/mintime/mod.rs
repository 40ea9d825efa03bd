//! Minimum time to steer `ẋ = Ax + ω`, `ω(t) ∈ Ω`, to the origin.
//!
//! `T` is reachable iff for every unit `η`
//! `ηᵀx₀ + ∫₀ᵀ h_Ω(e^{−Aᵀs}η) ds ≥ 0`. The left side is convex and
//! positively homogeneous in `η`, so its sign is decided by minimizing over
//! the unit sphere; `T*` is then found by bisection.

mod control;
mod sphere;

pub use control::{
    reconstruct_controls, simulate, ControlLaw, Reconstruction, Segment, Trajectory,
};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{VPolytope, Zonotope};
use crate::linalg::{default_tol_eig, expm, rank, spectrum, Matrix, Vector};
use crate::resilience::{ResilienceVerdict, Ternary};
use crate::system::{DualSet, LinearSystem};

/// Convex compact control set given by generators or by vertices.
#[derive(Debug, Clone)]
pub enum ControlSet {
    Zonotope(Zonotope),
    Vertices(VPolytope),
}

impl ControlSet {
    pub fn dim(&self) -> usize {
        match self {
            ControlSet::Zonotope(z) => z.dim(),
            ControlSet::Vertices(v) => v.dim(),
        }
    }

    fn points(&self) -> &[Vector] {
        match self {
            ControlSet::Zonotope(z) => z.generators(),
            ControlSet::Vertices(v) => v.vertices(),
        }
    }

    pub fn support(&self, p: &Vector) -> f64 {
        match self {
            ControlSet::Zonotope(z) => z.support(p),
            ControlSet::Vertices(v) => v.support(p),
        }
    }

    /// A maximizer of `pᵀω`.
    pub fn support_point(&self, p: &Vector) -> Vector {
        match self {
            ControlSet::Zonotope(z) => {
                z.generators()
                    .iter()
                    .fold(Vector::zeros(z.dim()), |acc, g| {
                        if g.dot(p) >= 0.0 {
                            acc + g
                        } else {
                            acc - g
                        }
                    })
            }
            ControlSet::Vertices(v) => v.vertices()[argmax(v.vertices(), p)].clone(),
        }
    }

    /// Identifies the exposed face: sign pattern of the generators or the
    /// index of the maximizing vertex.
    pub fn face(&self, p: &Vector) -> u64 {
        match self {
            ControlSet::Zonotope(z) => z.generators().iter().enumerate().fold(0, |acc, (i, g)| {
                if g.dot(p) >= 0.0 {
                    acc | 1 << i
                } else {
                    acc
                }
            }),
            ControlSet::Vertices(v) => argmax(v.vertices(), p) as u64,
        }
    }
}

/// Lowest index among the maximizers of `pᵀv`.
fn argmax(points: &[Vector], p: &Vector) -> usize {
    let mut best = 0;
    let mut val = f64::NEG_INFINITY;
    for (i, v) in points.iter().enumerate() {
        let x = v.dot(p);
        if x > val {
            val = x;
            best = i;
        }
    }
    best
}

/// Known piecewise-constant forcing `d(t)`, value `values[i]` on
/// `[breaks[i], breaks[i+1])`; the last value extends to infinity.
#[derive(Debug, Clone)]
pub struct Disturbance {
    pub breaks: Vec<f64>,
    pub values: Vec<Vector>,
}

impl Disturbance {
    pub fn at(&self, t: f64) -> &Vector {
        let i = self.breaks.partition_point(|b| *b <= t).saturating_sub(1);
        &self.values[i.min(self.values.len() - 1)]
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MinTimeOptions {
    /// Bisection stops once the bracket is below `max(rel·T, abs)`.
    pub rel_time_tol: f64,
    pub abs_time_tol: f64,
    pub horizon: f64,
    /// Number of sphere directions used to seed the inner search.
    pub sphere_grid: Option<usize>,
    /// Gauss–Legendre panels on `[0, T]`.
    pub panels: usize,
    /// First trial time; doubled until reachable.
    pub initial_guess: Option<f64>,
}

impl Default for MinTimeOptions {
    fn default() -> Self {
        Self {
            rel_time_tol: 1e-4,
            abs_time_tol: 1e-9,
            horizon: 1e3,
            sphere_grid: None,
            panels: 256,
            initial_guess: None,
        }
    }
}

impl MinTimeOptions {
    pub fn time_tol(&self, t: f64) -> f64 {
        (self.rel_time_tol * t).max(self.abs_time_tol)
    }
}

#[derive(Debug, Clone)]
pub struct MinTimeProblem {
    pub a: Matrix,
    pub control_set: ControlSet,
    pub x0: Vector,
    pub disturbance: Option<Disturbance>,
    pub options: MinTimeOptions,
}

#[derive(Debug, Clone, Serialize)]
pub struct MinTimeResult {
    pub t_star: f64,
    /// Unit adjoint direction at the unreachable side of the final bracket.
    pub eta_star: Vector,
    pub bracket: [f64; 2],
    pub time_tol: f64,
    pub converged: bool,
    /// Distinct directions attain the minimal slack.
    pub degenerate_direction: bool,
    pub bisection_steps: usize,
}

// 4-point Gauss–Legendre rule on [−1, 1].
const GL_X: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];
const GL_W: [f64; 4] = [
    0.347_854_845_137_453_9,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_9,
];

/// The slack function at a fixed horizon, with the quadrature weights and
/// `e^{−As}` folded into the control set's points.
pub struct Slack {
    n: usize,
    zonotope: bool,
    /// `m` points per node, each `n` long, flattened.
    pts: Vec<f64>,
    m: usize,
    nodes: usize,
    /// `x₀` plus the disturbance contribution.
    linear: Vector,
    /// Magnitude used for relative comparisons.
    pub scale: f64,
}

impl Slack {
    pub fn new(prob: &MinTimeProblem, t: f64) -> Self {
        let a = &prob.a;
        let n = a.nrows();
        let raw = prob.control_set.points();
        let m = raw.len();
        let panels = prob.options.panels.max(1);
        let h = t / panels as f64;
        let step = expm(a, -h);
        let offsets: Vec<Matrix> = GL_X.iter().map(|x| expm(a, -0.5 * h * (x + 1.0))).collect();
        let mut pts = Vec::with_capacity(panels * 4 * m * n);
        let mut start = Matrix::identity(n, n);
        for _ in 0..panels {
            for (off, w) in offsets.iter().zip(GL_W) {
                let e = &start * off;
                let wk = 0.5 * h * w;
                for p in raw {
                    let c = &e * p * wk;
                    pts.extend(c.iter());
                }
            }
            start = &start * &step;
        }
        let mut linear = prob.x0.clone();
        if let Some(d) = &prob.disturbance {
            linear += disturbance_integral(a, d, t);
        }
        let mut s = Self {
            n,
            zonotope: matches!(prob.control_set, ControlSet::Zonotope(_)),
            pts,
            m,
            nodes: panels * 4,
            linear,
            scale: 0.0,
        };
        let mass: f64 = s
            .pts
            .chunks(n)
            .map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt())
            .sum();
        s.scale = prob.x0.norm() + mass / if s.zonotope { 1.0 } else { m as f64 };
        s
    }

    /// Slack value and gradient at `eta`.
    pub fn eval(&self, eta: &Vector) -> (f64, Vector) {
        let n = self.n;
        let e = eta.as_slice();
        let mut f = self.linear.dot(eta);
        let mut g = self.linear.clone();
        if self.zonotope {
            for c in self.pts.chunks_exact(n) {
                let d: f64 = c.iter().zip(e).map(|(a, b)| a * b).sum();
                let s = if d >= 0.0 { 1.0 } else { -1.0 };
                f += s * d;
                for (gi, ci) in g.iter_mut().zip(c) {
                    *gi += s * ci;
                }
            }
        } else {
            for node in self.pts.chunks_exact(n * self.m) {
                let mut best = f64::NEG_INFINITY;
                let mut arg = 0;
                for (j, c) in node.chunks_exact(n).enumerate() {
                    let d: f64 = c.iter().zip(e).map(|(a, b)| a * b).sum();
                    if d > best {
                        best = d;
                        arg = j;
                    }
                }
                f += best;
                for (gi, ci) in g.iter_mut().zip(&node[arg * n..(arg + 1) * n]) {
                    *gi += ci;
                }
            }
        }
        debug_assert_eq!(self.pts.len(), self.nodes * self.m * n);
        (f, g)
    }

    pub fn value(&self, eta: &Vector) -> f64 {
        self.eval(eta).0
    }
}

/// `∫₀ᵀ e^{−As} d(s) ds`, piece by piece.
fn disturbance_integral(a: &Matrix, d: &Disturbance, t: f64) -> Vector {
    let n = a.nrows();
    let mut acc = Vector::zeros(n);
    let mut cuts: Vec<f64> = d
        .breaks
        .iter()
        .copied()
        .filter(|b| *b > 0.0 && *b < t)
        .collect();
    cuts.insert(0, 0.0);
    cuts.push(t);
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let v = d.at(0.5 * (lo + hi));
        let sub = 8;
        let h = (hi - lo) / sub as f64;
        for k in 0..sub {
            let s0 = lo + k as f64 * h;
            for (x, wt) in GL_X.iter().zip(GL_W) {
                let s = s0 + 0.5 * h * (x + 1.0);
                acc += expm(a, -s) * v * (0.5 * h * wt);
            }
        }
    }
    acc
}

/// Minimum of the slack over the unit sphere.
#[derive(Debug, Clone)]
pub struct InnerMin {
    pub value: f64,
    pub eta: Vector,
    pub degenerate: bool,
}

/// Multi-start Riemannian gradient descent with Armijo backtracking.
pub fn minimize_on_sphere(slack: &Slack, grid: &[Vector], warm: &[Vector]) -> InnerMin {
    let n = slack.n;
    let mut scored: Vec<(f64, &Vector)> = grid
        .iter()
        .chain(warm)
        .map(|e| (slack.value(e), e))
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    let starts: Vec<Vector> = {
        let mut out: Vec<Vector> = warm.to_vec();
        for (_, e) in &scored {
            if out.len()
                >= warm.len()
                    + if n == 1 {
                        2
                    } else if warm.is_empty() {
                        8
                    } else {
                        4
                    }
            {
                break;
            }
            if out.iter().all(|o| (o - *e).norm() > 1e-3) {
                out.push((*e).clone());
            }
        }
        out
    };

    let mut minima: Vec<(f64, Vector)> = Vec::new();
    for s in starts {
        minima.push(descend(slack, s));
    }
    minima.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (value, eta) = minima[0].clone();
    let tol = 1e-9 * slack.scale.max(1e-300);
    let degenerate = minima.iter().skip(1).any(|(v, e)| {
        (v - value).abs() <= tol && (e - &eta).norm() > 1e-2 && (e + &eta).norm() > 1e-2
    });
    InnerMin {
        value,
        eta,
        degenerate,
    }
}

/// Orthonormal basis of the complement of the unit vector `eta`.
fn tangent_basis(eta: &Vector) -> Matrix {
    let n = eta.len();
    let mut cols: Vec<Vector> = Vec::with_capacity(n - 1);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eta[a].abs().total_cmp(&eta[b].abs()));
    for &k in &order {
        if cols.len() == n - 1 {
            break;
        }
        let mut v = Vector::zeros(n);
        v[k] = 1.0;
        v -= eta * eta[k];
        for c in &cols {
            v -= c * c.dot(&v);
        }
        let nv = v.norm();
        if nv > 1e-8 {
            cols.push(v / nv);
        }
    }
    Matrix::from_columns(&cols)
}

/// BFGS in a tangent-plane chart `η = (η₀ + Uy)/‖η₀ + Uy‖`, re-centred when
/// the iterate drifts away from the chart origin.
fn descend(slack: &Slack, eta: Vector) -> (f64, Vector) {
    let n = eta.len();
    let (f0, g0) = slack.eval(&eta);
    if n == 1 {
        return (f0, eta);
    }
    let gtol = 1e-12 * slack.scale.max(1e-300);
    let ftol = 1e-15 * slack.scale.max(1e-300);
    let k = n - 1;

    let mut center = eta;
    let mut u = tangent_basis(&center);
    let mut y = Vector::zeros(k);
    let (mut f, mut g) = (f0, u.transpose() * g0);
    let mut h = Matrix::identity(k, k) * (0.1 / g.norm().max(1e-300));
    let point = |c: &Vector, u: &Matrix, y: &Vector| {
        let v = c + u * y;
        let nv = v.norm();
        (v / nv, nv)
    };
    let mut stall = 0;
    for _ in 0..500 {
        if g.norm() <= gtol {
            break;
        }
        let mut d = -(&h * &g);
        if d.dot(&g) >= 0.0 {
            h = Matrix::identity(k, k) * (0.1 / g.norm());
            d = -(&h * &g);
        }
        let slope = d.dot(&g);
        let mut alpha = 1.0;
        let mut next = None;
        while alpha > 1e-9 {
            let yt = &y + &d * alpha;
            let (eta_t, nv) = point(&center, &u, &yt);
            let (ft, gt) = slack.eval(&eta_t);
            if ft <= f + 1e-4 * alpha * slope {
                // dη/dy = (I − ηηᵀ)U/‖v‖
                let gy = u.transpose() * (&gt - &eta_t * gt.dot(&eta_t)) / nv;
                next = Some((yt, ft, gy));
                break;
            }
            alpha *= 0.5;
        }
        let Some((yn, fnew, gn)) = next else { break };
        let sk = &yn - &y;
        let yk = &gn - &g;
        let sy = sk.dot(&yk);
        if sy > 1e-300 {
            let rho = 1.0 / sy;
            let i = Matrix::identity(k, k);
            let left = &i - &sk * yk.transpose() * rho;
            h = &left * &h * left.transpose() + &sk * sk.transpose() * rho;
        }
        stall = if f - fnew <= ftol { stall + 1 } else { 0 };
        y = yn;
        f = fnew;
        g = gn;
        if stall >= 3 {
            break;
        }
        if y.norm() > 0.5 {
            let (eta_c, _) = point(&center, &u, &y);
            // Carry the gradient into the new chart; reset curvature.
            let (_, ge) = slack.eval(&eta_c);
            u = tangent_basis(&eta_c);
            center = eta_c;
            y = Vector::zeros(k);
            g = u.transpose() * (&ge - &center * ge.dot(&center));
            h = Matrix::identity(k, k) * (0.1 / g.norm().max(1e-300));
        }
    }
    let (eta_final, _) = point(&center, &u, &y);
    (f, eta_final)
}

/// Smallest `T` (within tolerance) at which the origin is reachable.
pub fn min_time(prob: &MinTimeProblem) -> Result<MinTimeResult> {
    let n = prob.a.nrows();
    if prob.control_set.dim() != n || prob.x0.len() != n {
        return Err(Error::DimensionMismatch(
            "control set or x0 does not match A".into(),
        ));
    }
    let opts = prob.options;
    if prob.x0.norm() == 0.0 && prob.disturbance.is_none() {
        let mut e = Vector::zeros(n);
        e[0] = 1.0;
        return Ok(MinTimeResult {
            t_star: 0.0,
            eta_star: e,
            bracket: [0.0, 0.0],
            time_tol: opts.abs_time_tol,
            converged: true,
            degenerate_direction: false,
            bisection_steps: 0,
        });
    }
    let grid = sphere::grid(n, opts.sphere_grid);
    let mut warm: Vec<Vector> = vec![prob.x0.normalize() * -1.0];
    if !warm[0].iter().all(|x| x.is_finite()) {
        warm.clear();
    }

    let check = |t: f64, warm: &mut Vec<Vector>| {
        let slack = Slack::new(prob, t);
        let r = minimize_on_sphere(&slack, &grid, warm);
        warm.retain(|w| (w - &r.eta).norm() > 1e-6);
        warm.insert(0, r.eta.clone());
        warm.truncate(3);
        let reachable = r.value >= -1e-12 * slack.scale;
        (reachable, r)
    };

    // Grow the upper end of the bracket until reachable.
    let mut lo = 0.0;
    let mut lo_min: Option<InnerMin> = None;
    let mut hi = opts.initial_guess.unwrap_or(1.0).min(opts.horizon);
    let mut steps = 0;
    loop {
        steps += 1;
        let (ok, r) = check(hi, &mut warm);
        if ok {
            break;
        }
        lo = hi;
        lo_min = Some(r);
        if hi >= opts.horizon {
            return Err(Error::NotReachableWithinHorizon {
                horizon: opts.horizon,
            });
        }
        hi = (hi * 2.0).min(opts.horizon);
    }
    while hi - lo > opts.time_tol(hi) {
        steps += 1;
        let mid = 0.5 * (lo + hi);
        let (ok, r) = check(mid, &mut warm);
        if ok {
            hi = mid;
        } else {
            lo = mid;
            lo_min = Some(r);
        }
    }
    let lo_min = match lo_min {
        // Polish the direction on a finer quadrature; switching times inherit
        // its accuracy.
        Some(r) => {
            let mut fine = prob.clone();
            fine.options.panels = opts.panels.max(1) * 8;
            let slack = Slack::new(&fine, lo);
            let polished = minimize_on_sphere(&slack, &[], std::slice::from_ref(&r.eta));
            InnerMin {
                degenerate: r.degenerate,
                ..polished
            }
        }
        None => {
            // Reachable at the first trial: the unreachable side is t = lo.
            let slack = Slack::new(prob, lo.max(opts.abs_time_tol));
            minimize_on_sphere(&slack, &grid, &warm)
        }
    };
    Ok(MinTimeResult {
        t_star: hi,
        eta_star: lo_min.eta,
        bracket: [lo, hi],
        time_tol: opts.time_tol(hi),
        converged: true,
        degenerate_direction: lo_min.degenerate,
        bisection_steps: steps,
    })
}

/// Nominal reach time, control set `B̄Ū`.
pub fn nominal_reach_time(
    sys: &LinearSystem,
    x0: &Vector,
    options: MinTimeOptions,
) -> Result<MinTimeResult> {
    let a = sys.a();
    let n = sys.n();
    let spec = spectrum(a, default_tol_eig(a));
    if !spec.semistable {
        return Err(Error::NotStabilizable(format!(
            "eigenvalue with real part {:e}",
            spec.max_real()
        )));
    }
    let mut ctrb = sys.b_bar().clone();
    let mut block = sys.b_bar().clone();
    for _ in 1..n {
        block = a * &block;
        ctrb = Matrix::from_columns(
            &ctrb
                .column_iter()
                .chain(block.column_iter())
                .map(|c| c.into_owned())
                .collect::<Vec<_>>(),
        );
    }
    if rank(&ctrb, 1e-10) < n {
        return Err(Error::NotStabilizable(
            "uncontrollable pair (A, B_bar)".into(),
        ));
    }
    min_time(&MinTimeProblem {
        a: a.clone(),
        control_set: ControlSet::Zonotope(sys.full_image()),
        x0: x0.clone(),
        disturbance: None,
        options,
    })
}

/// Malfunctioning reach time: the minimum time of the dual system with
/// control set `Z`.
pub fn malfunction_reach_time(
    sys: &LinearSystem,
    dual: &DualSet,
    verdict: &ResilienceVerdict,
    x0: &Vector,
    options: MinTimeOptions,
) -> Result<MinTimeResult> {
    let z = match (&dual.z, verdict.stabilizable) {
        (Some(z), Ternary::Yes) => z,
        _ => {
            return Err(Error::NotResilientlyStabilizable(
                "resilient stabilizability is not established".into(),
            ))
        }
    };
    min_time(&MinTimeProblem {
        a: sys.a().clone(),
        control_set: ControlSet::Vertices(z.vrep.clone()),
        x0: x0.clone(),
        disturbance: None,
        options,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{image_box, HyperBox};

    fn scalar(c_half: f64, x0: f64) -> MinTimeProblem {
        let z = Zonotope::new(1, vec![Vector::from_element(1, c_half)]).unwrap();
        MinTimeProblem {
            a: Matrix::from_element(1, 1, -1.0),
            control_set: ControlSet::Zonotope(z),
            x0: Vector::from_element(1, x0),
            disturbance: None,
            options: MinTimeOptions {
                rel_time_tol: 1e-9,
                ..Default::default()
            },
        }
    }

    pub(crate) fn double_integrator() -> MinTimeProblem {
        let a = Matrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let b = Matrix::from_column_slice(2, 1, &[0.0, 1.0]);
        MinTimeProblem {
            a,
            control_set: ControlSet::Zonotope(image_box(&b, &HyperBox::unit(1)).unwrap()),
            x0: Vector::from_column_slice(&[1.0, 0.0]),
            disturbance: None,
            options: MinTimeOptions {
                rel_time_tol: 1e-6,
                ..Default::default()
            },
        }
    }

    #[test]
    fn scalar_nominal_is_ln2() {
        let r = min_time(&scalar(1.0, 1.0)).unwrap();
        assert!((r.t_star - 2f64.ln()).abs() < 1e-6, "{}", r.t_star);
        assert!((r.eta_star[0] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn scalar_dual_is_ln3() {
        let r = min_time(&scalar(0.5, 1.0)).unwrap();
        assert!((r.t_star - 3f64.ln()).abs() < 1e-6, "{}", r.t_star);
    }

    #[test]
    fn zero_state_is_instant() {
        let r = min_time(&scalar(1.0, 0.0)).unwrap();
        assert_eq!(r.t_star, 0.0);
    }

    #[test]
    fn unreachable_reports_horizon() {
        // ẋ = x + u with |u| ≤ 0.5 only returns from |x₀| < 0.5.
        let mut p = scalar(0.5, 2.0);
        p.a[(0, 0)] = 1.0;
        p.options.horizon = 50.0;
        assert!(matches!(
            min_time(&p),
            Err(Error::NotReachableWithinHorizon { .. })
        ));
    }

    #[test]
    fn double_integrator_takes_two() {
        let r = min_time(&double_integrator()).unwrap();
        assert!((r.t_star - 2.0).abs() < 1e-3, "{}", r.t_star);
    }

    #[test]
    fn vertex_form_matches_generator_form() {
        let a = Matrix::from_row_slice(2, 2, &[-0.5, 1.0, -1.0, -0.5]);
        let z = Zonotope::new(
            2,
            vec![
                Vector::from_column_slice(&[1.0, 0.3]),
                Vector::from_column_slice(&[-0.2, 0.8]),
            ],
        )
        .unwrap();
        let verts = VPolytope::new(2, z.sign_pattern_points());
        let x0 = Vector::from_column_slice(&[2.0, -1.0]);
        let mk = |cs| MinTimeProblem {
            a: a.clone(),
            control_set: cs,
            x0: x0.clone(),
            disturbance: None,
            options: MinTimeOptions {
                rel_time_tol: 1e-7,
                ..Default::default()
            },
        };
        let t1 = min_time(&mk(ControlSet::Zonotope(z))).unwrap().t_star;
        let t2 = min_time(&mk(ControlSet::Vertices(verts))).unwrap().t_star;
        assert!((t1 - t2).abs() < 1e-5 * t1);
    }

    #[test]
    fn slack_nondecreasing_in_time() {
        let p = double_integrator();
        let eta = Vector::from_column_slice(&[-0.6, -0.8]);
        let mut prev = f64::NEG_INFINITY;
        for k in 1..20 {
            let v = Slack::new(&p, 0.2 * k as f64).value(&eta);
            assert!(v >= prev - 1e-12);
            prev = v;
        }
    }

    #[test]
    fn constant_disturbance_shifts_target() {
        // ẋ = −x + u + 0.5 with |u| ≤ 1 from x₀ = 1: ẋ ≤ −x − 0.5, so
        // x(t) = 1.5e^{−t} − 0.5 hits zero at ln 3.
        let mut p = scalar(1.0, 1.0);
        p.disturbance = Some(Disturbance {
            breaks: vec![0.0],
            values: vec![Vector::from_element(1, 0.5)],
        });
        let r = min_time(&p).unwrap();
        assert!((r.t_star - 3f64.ln()).abs() < 1e-6, "{}", r.t_star);
    }
}
