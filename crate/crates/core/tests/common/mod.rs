#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use resilia::app::{AnalysisOptions, SystemSpec};
use resilia::linalg::{rank, spectrum, Matrix};
use resilia::resilience::{check_all, Ternary, Tolerances};

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

/// Hurwitz `A`, `n + 1` inputs with the last one lost at a reduced range,
/// resiliently stabilizable. Deterministic in `seed`.
pub fn random_case(seed: u64) -> SystemSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let n = if rng.random_bool(0.5) { 2 } else { 3 };
        let g = Matrix::from_fn(n, n, |_, _| normal(&mut rng));
        let shift = spectrum(&g, 1e-9).max_real() + 0.2 + rng.random::<f64>();
        let a = g - Matrix::identity(n, n) * shift;
        let b = Matrix::from_fn(n, n + 1, |_, _| normal(&mut rng));
        if rank(&b.columns(0, n).into_owned(), 1e-3) < n {
            continue;
        }
        let mut widths = vec![1.0; n + 1];
        widths[n] = 0.05 + 0.25 * rng.random::<f64>();
        let x0: Vec<f64> = (0..n).map(|_| normal(&mut rng)).collect();
        let spec = SystemSpec {
            n,
            a: rows(&a),
            b_bar: rows(&b),
            half_widths: widths,
            lost_actuators: vec![n],
            x0,
            options: AnalysisOptions {
                num_pairs: 20,
                seed,
                ..AnalysisOptions::default()
            },
        };
        let sys = spec.system().unwrap();
        let Ok(dual) = sys.dual_set() else { continue };
        if check_all(&sys, &dual, Tolerances::for_system(&sys)).stabilizable == Ternary::Yes {
            return spec;
        }
    }
}

/// `ẋ = −x + ū`, `ū ∈ [−1.5, 1.5] × [−0.5, 0.5]`, second input lost.
/// Nominal set `[−2, 2]`, `Z = [−1, 1]`; from `x₀ = 2`: `T_N = ln 2`,
/// `T_M = ln 3`.
pub fn scalar_spec() -> SystemSpec {
    SystemSpec {
        n: 1,
        a: vec![vec![-1.0]],
        b_bar: vec![vec![1.0, 1.0]],
        half_widths: vec![1.5, 0.5],
        lost_actuators: vec![1],
        x0: vec![2.0],
        options: AnalysisOptions {
            time_tol: 1e-9,
            num_pairs: 5,
            ..AnalysisOptions::default()
        },
    }
}
