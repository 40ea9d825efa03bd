//! Deterministic direction sets on the unit sphere.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::Vector;

pub fn default_size(n: usize) -> usize {
    match n {
        1 => 2,
        2 => 64,
        3 => 512,
        _ => 1024,
    }
}

pub fn grid(n: usize, size: Option<usize>) -> Vec<Vector> {
    let k = size.unwrap_or_else(|| default_size(n)).max(2);
    match n {
        1 => vec![Vector::from_element(1, 1.0), Vector::from_element(1, -1.0)],
        2 => (0..k)
            .map(|i| {
                let th = std::f64::consts::TAU * i as f64 / k as f64;
                Vector::from_column_slice(&[th.cos(), th.sin()])
            })
            .collect(),
        3 => {
            // Fibonacci lattice.
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..k)
                .map(|i| {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / k as f64;
                    let r = (1.0 - z * z).sqrt();
                    let th = golden * i as f64;
                    Vector::from_column_slice(&[r * th.cos(), r * th.sin(), z])
                })
                .collect()
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
            (0..k)
                .map(|_| {
                    let v = Vector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
                    v.normalize()
                })
                .collect()
        }
    }
}
