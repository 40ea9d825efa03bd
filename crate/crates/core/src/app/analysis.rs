//! End-to-end analysis of one system file.

use rayon::prelude::*;
use serde::Serialize;

use super::spec::SystemSpec;
use crate::bounds::{
    best_bounds, evaluate_pair, extremals, Hypotheses, LyapunovPair, PairBounds, ReachBounds,
};
use crate::error::Result;
use crate::geometry::pnorm_min_box_boundary;
use crate::linalg::{default_tol_eig, rank, spectrum, Matrix};
use crate::mintime::{malfunction_reach_time, nominal_reach_time, MinTimeOptions, MinTimeResult};
use crate::mintime::{reconstruct_controls, simulate};
use crate::pairs::{
    inner_ellipsoid_pair, outer_ellipsoid_pair, sample_pairs, EllipsoidPair, PairKind,
};
use crate::resilience::{
    check_all, check_full_actuation, FullActuation, ResilienceVerdict, Ternary, Tolerances,
};
use crate::system::{DualSet, LinearSystem, Polytope};

/// Which parts of the pipeline to run.
#[derive(Debug, Clone, Copy)]
pub struct Stages {
    pub pairs: bool,
    pub nominal: bool,
    pub malfunction: bool,
    /// Propagate reach-time failures instead of recording them.
    pub strict: bool,
}

impl Stages {
    pub fn all() -> Self {
        Self {
            pairs: true,
            nominal: true,
            malfunction: true,
            strict: false,
        }
    }

    pub fn verdicts_only() -> Self {
        Self {
            pairs: false,
            nominal: false,
            malfunction: false,
            strict: false,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SystemSummary {
    pub n: usize,
    pub inputs: usize,
    pub lost_actuators: Vec<usize>,
    pub retained_actuators: Vec<usize>,
    pub x0: Vec<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumSummary {
    /// `[re, im]`
    pub eigenvalues: Vec<[f64; 2]>,
    pub hurwitz: bool,
    pub tol_eig: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GeometrySummary {
    pub nominal_facets: Option<usize>,
    pub nominal_vertices: Option<usize>,
    pub bu_facets: Option<usize>,
    pub z_facets: Option<usize>,
    pub z_vertices: Option<usize>,
    pub z_degenerate: bool,
    pub z_min_offset: Option<f64>,
    /// Smallest Euclidean norm of `B̄ū` over the boundary of the input box.
    /// Zero whenever `B̄` has more columns than rows.
    pub b_min_input_box: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EllipsoidSummary {
    pub kind: PairKind,
    /// Index in the combined pair list when accepted.
    pub pair_index: Option<usize>,
    pub q_margin: Option<f64>,
    pub accepted: bool,
    pub note: Option<String>,
    pub bounds: Option<PairBounds>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundsSummary {
    pub random_pairs: usize,
    /// Pairs `0..random_pairs` are random, the rest come from ellipsoids.
    pub ellipsoids: Vec<EllipsoidSummary>,
    pub first_random: Option<PairBounds>,
    pub best: Option<ReachBounds>,
    pub best_random: Option<ReachBounds>,
    pub best_ellipsoid: Option<ReachBounds>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReachTime {
    pub t_star: f64,
    pub bracket: [f64; 2],
    pub time_tol: f64,
    pub converged: bool,
    pub eta_star: Vec<f64>,
    pub degenerate_direction: bool,
    pub bisection_steps: usize,
    pub switches: Vec<f64>,
    pub lp_fallbacks: usize,
    pub max_control_excess: f64,
    pub terminal_error: f64,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ReachTimes {
    pub nominal: Option<ReachTime>,
    pub malfunction: Option<ReachTime>,
    pub skipped: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Ratios {
    /// `T_M*/T_N*`
    pub slowdown: Option<f64>,
    /// Best `T_M` upper bound over best `T_N` lower bound.
    pub bound_factor: Option<f64>,
    /// As `bound_factor`, with the `T_M` upper bound taken from the
    /// ellipsoids of `Z` only.
    pub bound_factor_z_ellipsoids: Option<f64>,
    pub rq_lower: Option<f64>,
    pub rq_upper: Option<f64>,
    /// An upper bound above 1 says nothing about `r_q`.
    pub rq_upper_uninformative: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub pair_index: Option<usize>,
    pub kind: String,
    pub lam_min_p: Option<f64>,
    pub lam_max_p: Option<f64>,
    pub lam_min_q: Option<f64>,
    pub lam_max_q: Option<f64>,
    pub tm_lower: Option<f64>,
    pub tm_upper: Option<f64>,
    pub tn_lower: Option<f64>,
    pub tn_upper: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub system: SystemSummary,
    pub spectrum: SpectrumSummary,
    pub geometry: GeometrySummary,
    pub verdicts: ResilienceVerdict,
    pub full_actuation: FullActuation,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundsSummary>,
    pub reach_times: ReachTimes,
    pub ratios: Ratios,
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<SweepRow>,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }
}

pub fn run_analysis(spec: &SystemSpec) -> Result<Report> {
    run_analysis_with(spec, Stages::all())
}

struct Candidate {
    kind: PairKind,
    pair: LyapunovPair,
}

pub fn run_analysis_with(spec: &SystemSpec, stages: Stages) -> Result<Report> {
    let sys = spec.system()?;
    let x0 = spec.x0_vector();
    let a = sys.a();
    let mut tol = Tolerances::for_system(&sys);
    if let Some(e) = spec.options.tol_eig {
        tol.eig = e;
    }
    let spec_eigs = spectrum(a, tol.eig);
    let hurwitz = spectrum(a, default_tol_eig(a)).hurwitz;

    let full = sys.full_image_polytope()?;
    let dual = sys.dual_set()?;
    let verdicts = check_all(&sys, &dual, tol);
    let full_actuation = check_full_actuation(&sys, &dual, tol);

    let geometry = GeometrySummary {
        nominal_facets: full.as_ref().map(Polytope::facet_count),
        nominal_vertices: full.as_ref().map(Polytope::vertex_count),
        bu_facets: dual.bu.as_ref().map(|h| h.facets().len()),
        z_facets: dual.z.as_ref().map(Polytope::facet_count),
        z_vertices: dual.z.as_ref().map(Polytope::vertex_count),
        z_degenerate: dual.degenerate,
        z_min_offset: dual.z.as_ref().map(|z| z.hrep.min_offset()),
        b_min_input_box: pnorm_min_box_boundary(
            sys.b_bar(),
            sys.inputs(),
            &Matrix::identity(sys.n(), sys.n()),
        )
        .ok()
        .map(|e| e.value),
    };

    let hyp = Hypotheses {
        hurwitz,
        full_rank: rank(sys.b_bar(), 1e-10) == sys.n(),
        stabilizable: verdicts.stabilizable == Ternary::Yes,
        origin_interior: dual.origin_interior(tol.offset),
    };

    let mut notes = Vec::new();
    let bounds = if stages.pairs && hurwitz {
        match full.as_ref() {
            Some(full) => Some(pair_bounds(spec, &sys, &dual, full, &x0, &hyp)?),
            None => {
                notes.push("B_bar has rank < n: no bounds".into());
                None
            }
        }
    } else {
        if stages.pairs {
            notes.push("A is not Hurwitz: Lyapunov bounds unavailable".into());
        }
        None
    };
    let (summary, rows) = match bounds {
        Some((s, r)) => (Some(s), r),
        None => (None, Vec::new()),
    };

    let best = summary.as_ref().and_then(|s| s.best.clone());
    let z_ellipsoid_tm_upper = summary.as_ref().and_then(|s| {
        s.ellipsoids
            .iter()
            .filter(|e| matches!(e.kind, PairKind::OuterEllipsoid | PairKind::InnerEllipsoid))
            .filter_map(|e| e.bounds.as_ref().and_then(|b| b.tm.upper.value()))
            .reduce(f64::min)
    });
    let mt_options = |lower: Option<f64>, upper: Option<f64>| MinTimeOptions {
        rel_time_tol: spec.options.time_tol,
        horizon: spec.options.horizon_max.max(upper.map_or(0.0, |u| 1.5 * u)),
        sphere_grid: spec.options.sphere_grid,
        initial_guess: lower.filter(|l| *l > 0.0),
        ..MinTimeOptions::default()
    };
    let pick = |f: fn(&ReachBounds) -> Option<crate::bounds::Best>| {
        best.as_ref().and_then(f).map(|b| b.value)
    };

    let mut reach = ReachTimes::default();
    if stages.nominal {
        let opts = mt_options(pick(|b| b.tn_lower), pick(|b| b.tn_upper));
        match nominal_reach_time(&sys, &x0, opts).and_then(|r| verify(&sys, &x0, None, r)) {
            Ok(r) => reach.nominal = Some(r),
            Err(e) if !stages.strict => reach.skipped.push(format!("nominal: {e}")),
            Err(e) => return Err(e),
        }
    }
    if stages.malfunction {
        let opts = mt_options(pick(|b| b.tm_lower), pick(|b| b.tm_upper));
        let z = dual.z.as_ref().map(|z| &z.vrep);
        match malfunction_reach_time(&sys, &dual, &verdicts, &x0, opts)
            .and_then(|r| verify(&sys, &x0, z, r))
        {
            Ok(r) => reach.malfunction = Some(r),
            Err(e) if !stages.strict => reach.skipped.push(format!("malfunction: {e}")),
            Err(e) => return Err(e),
        }
    }

    let rq_upper = pick(|b| b.rq_upper);
    let ratios = Ratios {
        slowdown: match (&reach.nominal, &reach.malfunction) {
            (Some(n), Some(m)) if n.t_star > 0.0 => Some(m.t_star / n.t_star),
            _ => None,
        },
        bound_factor: match (pick(|b| b.tm_upper), pick(|b| b.tn_lower)) {
            (Some(u), Some(l)) if l > 0.0 => Some(u / l),
            _ => None,
        },
        bound_factor_z_ellipsoids: match (z_ellipsoid_tm_upper, pick(|b| b.tn_lower)) {
            (Some(u), Some(l)) if l > 0.0 => Some(u / l),
            _ => None,
        },
        rq_lower: pick(|b| b.rq_lower),
        rq_upper,
        rq_upper_uninformative: rq_upper.is_some_and(|u| u > 1.0),
    };

    let mut sweep = rows;
    if !sweep.is_empty() {
        for (label, r) in [
            ("solver-nominal", &reach.nominal),
            ("solver-malfunction", &reach.malfunction),
        ] {
            if let Some(r) = r {
                let t = Some(r.t_star);
                let (tn, tm) = if label == "solver-nominal" {
                    (t, None)
                } else {
                    (None, t)
                };
                sweep.push(SweepRow {
                    pair_index: None,
                    kind: label.into(),
                    lam_min_p: None,
                    lam_max_p: None,
                    lam_min_q: None,
                    lam_max_q: None,
                    tm_lower: tm,
                    tm_upper: tm,
                    tn_lower: tn,
                    tn_upper: tn,
                });
            }
        }
    }

    Ok(Report {
        system: SystemSummary {
            n: sys.n(),
            inputs: sys.inputs().dim(),
            lost_actuators: sys.lost().to_vec(),
            retained_actuators: sys.retained(),
            x0: spec.x0.clone(),
            seed: spec.options.seed,
        },
        spectrum: SpectrumSummary {
            eigenvalues: spec_eigs.eigenvalues.iter().map(|l| [l.re, l.im]).collect(),
            hurwitz,
            tol_eig: tol.eig,
        },
        geometry,
        verdicts,
        full_actuation,
        bounds: summary,
        reach_times: reach,
        ratios,
        notes,
        sweep,
    })
}

fn pair_bounds(
    spec: &SystemSpec,
    sys: &LinearSystem,
    dual: &DualSet,
    full: &Polytope,
    x0: &crate::linalg::Vector,
    hyp: &Hypotheses,
) -> Result<(BoundsSummary, Vec<SweepRow>)> {
    let a = sys.a();
    let random = sample_pairs(a, spec.options.num_pairs, spec.options.seed)?;
    let random_count = random.len();
    let mut candidates: Vec<Candidate> = random
        .into_iter()
        .map(|pair| Candidate {
            kind: PairKind::Random,
            pair,
        })
        .collect();

    let mut ellipsoids = Vec::new();
    let mut attempts: Vec<(PairKind, Option<Result<EllipsoidPair>>)> = match &dual.z {
        Some(z) => vec![
            (
                PairKind::OuterEllipsoid,
                Some(outer_ellipsoid_pair(a, &z.vrep)),
            ),
            (
                PairKind::InnerEllipsoid,
                Some(inner_ellipsoid_pair(a, &z.hrep)),
            ),
        ],
        None => vec![
            (PairKind::OuterEllipsoid, None),
            (PairKind::InnerEllipsoid, None),
        ],
    };
    attempts.push((
        PairKind::NominalOuterEllipsoid,
        Some(outer_ellipsoid_pair(a, &full.vrep)),
    ));
    attempts.push((
        PairKind::NominalInnerEllipsoid,
        Some(inner_ellipsoid_pair(a, &full.hrep)),
    ));
    for (kind, attempt) in attempts {
        let mut s = EllipsoidSummary {
            kind,
            pair_index: None,
            q_margin: None,
            accepted: false,
            note: None,
            bounds: None,
        };
        match attempt {
            None => s.note = Some("Z has empty interior".into()),
            Some(Err(e)) => s.note = Some(e.to_string()),
            Some(Ok(ep)) => {
                s.q_margin = Some(ep.q_margin);
                match ep.pair {
                    Some(pair) => {
                        s.accepted = true;
                        s.pair_index = Some(candidates.len());
                        candidates.push(Candidate { kind, pair });
                    }
                    None => s.note = Some("Q = -A^T P - P A is not positive definite".into()),
                }
            }
        }
        ellipsoids.push(s);
    }

    let z = dual.z.as_ref();
    let evaluated: Vec<PairBounds> = candidates
        .par_iter()
        .map(|c| extremals(&c.pair, full, z).map(|ext| evaluate_pair(&c.pair, x0, ext, hyp)))
        .collect::<Result<_>>()?;

    for s in ellipsoids.iter_mut() {
        s.bounds = s.pair_index.map(|i| evaluated[i].clone());
    }

    let best = best_bounds(&evaluated).ok();
    let best_random = best_bounds(&evaluated[..random_count]).ok();
    let best_ellipsoid = best_bounds(&evaluated[random_count..]).ok().map(|mut b| {
        for x in [
            &mut b.tn_lower,
            &mut b.tn_upper,
            &mut b.tm_lower,
            &mut b.tm_upper,
            &mut b.rq_lower,
            &mut b.rq_upper,
        ] {
            if let Some(x) = x.as_mut() {
                x.pair_index += random_count;
            }
        }
        b
    });

    let rows = candidates
        .iter()
        .zip(&evaluated)
        .enumerate()
        .map(|(i, (c, b))| SweepRow {
            pair_index: Some(i),
            kind: c.kind.label().into(),
            lam_min_p: Some(c.pair.lam_min_p),
            lam_max_p: Some(c.pair.lam_max_p),
            lam_min_q: Some(c.pair.lam_min_q),
            lam_max_q: Some(c.pair.lam_max_q),
            tm_lower: b.tm.lower.value(),
            tm_upper: b.tm.upper.value(),
            tn_lower: b.tn.lower.value(),
            tn_upper: b.tn.upper.value(),
        })
        .collect();

    Ok((
        BoundsSummary {
            random_pairs: random_count,
            ellipsoids,
            first_random: evaluated.first().filter(|_| random_count > 0).cloned(),
            best,
            best_random,
            best_ellipsoid,
        },
        rows,
    ))
}

/// Rebuild the bang-bang control from `η*` and integrate it.
fn verify(
    sys: &LinearSystem,
    x0: &crate::linalg::Vector,
    z: Option<&crate::geometry::VPolytope>,
    r: MinTimeResult,
) -> Result<ReachTime> {
    let rec = reconstruct_controls(&r, sys, z, 4000)?;
    let traj = simulate(
        sys.a(),
        &rec.forcing,
        x0,
        r.t_star,
        r.t_star.max(1e-12) / 4000.0,
    );
    Ok(ReachTime {
        t_star: r.t_star,
        bracket: r.bracket,
        time_tol: r.time_tol,
        converged: r.converged,
        eta_star: r.eta_star.iter().copied().collect(),
        degenerate_direction: r.degenerate_direction,
        bisection_steps: r.bisection_steps,
        switches: rec.switches,
        lp_fallbacks: rec.lp_fallbacks,
        max_control_excess: rec.max_excess,
        terminal_error: traj.terminal_error,
    })
}
