//! Random projection of high-dimensional unit vectors before realizing them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use tsirelson::correlation::GramSystem;
use tsirelson::realization::{jl_dimension, jl_reduce, realize, verify};

fn unit(v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (dim, eps) = (600, 0.5);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    // Three directions embedded in R^600; 25 vectors per side mixing them.
    let basis: Vec<Vec<f64>> = (0..3).map(|_| (0..dim).map(|_| rng.sample(StandardNormal)).collect()).collect();
    let mut side = || -> Vec<Vec<f64>> {
        (0..25)
            .map(|_| {
                let c: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
                unit((0..dim).map(|t| (0..3).map(|k| c[k] * basis[k][t]).sum()).collect())
            })
            .collect()
    };
    let g = GramSystem::new(side(), side())?;
    println!("target dimension for 50 points at ε = {eps}: {}", jl_dimension(eps, 50)?);

    let (reduced, report) = jl_reduce(&g, eps, 7)?;
    println!(
        "{} → {} dimensions in {} attempt(s); norm distortion {:.3}, inner-product error {:.3}",
        report.dim_in, report.dim_out, report.attempts, report.max_squared_norm_distortion, report.max_inner_product_error
    );
    let r = realize(&reduced)?;
    println!("realized on {} qubit(s) per side; deviation from the original: {:.3}", r.nu(), verify(&r, &g)?);
    Ok(())
}
