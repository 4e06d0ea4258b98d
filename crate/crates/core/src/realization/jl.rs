use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::{dot, RealizationError};
use crate::correlation::GramSystem;

/// Number of fresh projections tried before [`jl_reduce`] gives up on the target.
pub const JL_MAX_ATTEMPTS: u64 = 100;

/// Smallest `K ≥ 4 ln N / (ε²/2 − ε³/3)`.
pub fn jl_dimension(epsilon: f64, n_points: usize) -> Result<usize, RealizationError> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(RealizationError::Epsilon(epsilon));
    }
    if n_points < 2 {
        return Err(RealizationError::TooFewPoints(n_points));
    }
    let denom = epsilon * epsilon / 2.0 - epsilon.powi(3) / 3.0;
    Ok((4.0 * (n_points as f64).ln() / denom).ceil() as usize)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JlReport {
    pub epsilon: f64,
    pub seed: u64,
    pub dim_in: usize,
    pub dim_out: usize,
    /// Projections drawn; 0 when the map is the identity.
    pub attempts: u64,
    pub target_met: bool,
    /// Largest `|‖f(w)‖² / ‖w‖² − 1|` over the points and their pairwise differences,
    /// measured for the raw projection.
    pub max_squared_norm_distortion: f64,
    /// Largest `|⟨f(a)|f(b)⟩ − ⟨a|b⟩|` over all pairs of returned vectors.
    pub max_inner_product_error: f64,
}

fn project(matrix: &[Vec<f64>], w: &[f64]) -> Vec<f64> {
    matrix.iter().map(|row| dot(row, w)).collect()
}

fn squared_norm_distortion(points: &[Vec<f64>], images: &[Vec<f64>]) -> f64 {
    let ratio = |a: &[f64], fa: &[f64]| {
        let n = dot(a, a);
        if n <= f64::EPSILON {
            0.0
        } else {
            (dot(fa, fa) / n - 1.0).abs()
        }
    };
    let diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<f64>>();
    let mut worst = 0.0f64;
    for (i, (a, fa)) in points.iter().zip(images).enumerate() {
        worst = worst.max(ratio(a, fa));
        for (b, fb) in points[i + 1..].iter().zip(&images[i + 1..]) {
            worst = worst.max(ratio(&diff(a, b), &diff(fa, fb)));
        }
    }
    worst
}

fn inner_product_error(points: &[Vec<f64>], images: &[Vec<f64>]) -> f64 {
    let mut worst = 0.0f64;
    for (i, (a, fa)) in points.iter().zip(images).enumerate() {
        for (b, fb) in points[i..].iter().zip(&images[i..]) {
            worst = worst.max((dot(fa, fb) - dot(a, b)).abs());
        }
    }
    worst
}

/// Random Gaussian projection of all `m + n` vectors to `min(K, d)` dimensions.
///
/// Draws are repeated with a new stream of the seeded generator until the squared-norm
/// distortion is at most `ε`, up to [`JL_MAX_ATTEMPTS`] times; the best draw is kept.
/// Each projected vector is rescaled to its original length so unit vectors stay unit.
pub fn jl_reduce(g: &GramSystem, epsilon: f64, seed: u64) -> Result<(GramSystem, JlReport), RealizationError> {
    let points: Vec<Vec<f64>> = g.u().iter().chain(g.v()).cloned().collect();
    let k = jl_dimension(epsilon, points.len())?;
    let d = g.dim();
    if k >= d {
        let report = JlReport {
            epsilon,
            seed,
            dim_in: d,
            dim_out: d,
            attempts: 0,
            target_met: true,
            max_squared_norm_distortion: 0.0,
            max_inner_product_error: 0.0,
        };
        return Ok((g.clone(), report));
    }
    let scale = 1.0 / (k as f64).sqrt();
    let mut best: Option<(f64, Vec<Vec<f64>>, u64)> = None;
    for attempt in 1..=JL_MAX_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(attempt);
        let matrix: Vec<Vec<f64>> = (0..k)
            .map(|_| (0..d).map(|_| rng.sample::<f64, _>(StandardNormal) * scale).collect())
            .collect();
        let images: Vec<Vec<f64>> = points.iter().map(|w| project(&matrix, w)).collect();
        let distortion = squared_norm_distortion(&points, &images);
        if best.as_ref().is_none_or(|(b, _, _)| distortion < *b) {
            best = Some((distortion, images, attempt));
        }
        if distortion <= epsilon {
            break;
        }
    }
    let (distortion, mut images, attempt) = best.expect("at least one attempt");
    for (w, fw) in points.iter().zip(images.iter_mut()) {
        let (n, fnorm) = (dot(w, w).sqrt(), dot(fw, fw).sqrt());
        if fnorm > 0.0 {
            fw.iter_mut().for_each(|x| *x *= n / fnorm);
        }
    }
    let report = JlReport {
        epsilon,
        seed,
        dim_in: d,
        dim_out: k,
        attempts: attempt,
        target_met: distortion <= epsilon,
        max_squared_norm_distortion: distortion,
        max_inner_product_error: inner_product_error(&points, &images),
    };
    let v = images.split_off(g.m());
    Ok((GramSystem::new(images, v)?, report))
}
