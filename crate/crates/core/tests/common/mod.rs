#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use tsirelson::correlation::GramSystem;

pub const S: f64 = std::f64::consts::FRAC_1_SQRT_2;

pub fn data(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

/// `u = (e1, e2)` and `v = ((1,1)/√2, (1,−1)/√2)`: the CHSH-optimal unit vectors.
pub fn chsh_gram() -> GramSystem {
    GramSystem::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![vec![S, S], vec![S, -S]]).unwrap()
}

pub fn random_unit(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
    let n = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    w.into_iter().map(|x| x / n).collect()
}

/// Unit vectors in `R^dim` whose two sides each span the same `xi`-dimensional subspace.
/// Each side gets at least `xi` vectors so the span is reached.
pub fn random_system(rng: &mut ChaCha8Rng, xi: usize, m: usize, n: usize, dim: usize) -> GramSystem {
    let basis: Vec<Vec<f64>> = (0..xi).map(|_| random_unit(rng, dim)).collect();
    let mut side = |count: usize| -> Vec<Vec<f64>> {
        (0..count.max(xi))
            .map(|k| {
                let mut c = random_unit(rng, xi);
                if k < xi {
                    c[k] += 3.0;
                }
                let w: Vec<f64> = (0..dim).map(|t| c.iter().zip(&basis).map(|(ck, b)| ck * b[t]).sum()).collect();
                let nrm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
                w.into_iter().map(|x| x / nrm).collect()
            })
            .collect()
    };
    let u = side(m);
    let v = side(n);
    GramSystem::new(u, v).unwrap()
}
