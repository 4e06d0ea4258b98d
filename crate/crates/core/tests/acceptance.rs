//! Acceptance run: one line per criterion, nonzero exit if any fails.

mod common;

use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tsirelson::cli;
use tsirelson::clifford::{weyl_brauer, GeneratorForm};
use tsirelson::correlation::{
    no_signalling_check, BellFunctional, Convention, CorrelationOutcome, GramSystem, RsmInequality, Scenario,
};
use tsirelson::npa::{membership_check, npa_bound_bell, Level, ProbabilityTable, GeneralScenario};
use tsirelson::realization::{
    bipartite_expectation, build_state, expectation_grid, jl_dimension, jl_reduce, planar_observable, realize, verify,
    QuantumRealization,
};
use tsirelson::sdp::{elliptope_membership, suspension_bound, upper_bound_nc, ElliptopeGraph, ElliptopeVerdict, SdpOptions};
use tsirelson::stabilizer::{eigen_residual, eigen_sign_check, expected_signs, singlet_graph_state, verify_transform};

use common::{chsh_gram, data, random_system, S};

type Check = fn() -> Result<String, String>;

struct Criterion {
    name: &'static str,
    limit: Duration,
    check: Check,
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn cli_json(args: &[&str]) -> Result<serde_json::Value, String> {
    let r = cli::run(std::iter::once("tsirelson").chain(args.iter().copied()));
    ensure(r.code == 0, || format!("exit {}: {}", r.code, r.stderr.trim()))?;
    serde_json::from_str(&r.stdout).map_err(|e| e.to_string())
}

fn load(name: &str) -> BellFunctional {
    serde_json::from_str(&std::fs::read_to_string(data(name)).unwrap()).unwrap()
}

fn chsh_elliptope() -> Result<String, String> {
    let v = cli_json(&["bound", "--method", "elliptope", "--builtin", "chsh"])?;
    let b = v["bound"].as_f64().ok_or("no bound")?;
    ensure((b - (2f64.sqrt() - 1.0)).abs() <= 1e-3, || format!("bound {b}"))?;
    Ok(format!("bound {b:.5}"))
}

fn chsh_elliptope_rmet() -> Result<String, String> {
    let plain = cli_json(&["bound", "--method", "elliptope", "--builtin", "chsh"])?["bound"].as_f64().ok_or("no bound")?;
    let rmet = cli_json(&["bound", "--method", "elliptope_rmet", "--builtin", "chsh"])?["bound"].as_f64().ok_or("no bound")?;
    ensure((plain - rmet).abs() <= 1e-3, || format!("{plain} vs {rmet}"))?;
    Ok(format!("bound {rmet:.5}"))
}

fn classical_chsh() -> Result<String, String> {
    let zero_one = cli_json(&["classical-max", "--builtin", "chsh"])?["value"].as_f64().ok_or("no value")?;
    let pm = cli_json(&["classical-max", "--builtin", "chsh-pm"])?["value"].as_f64().ok_or("no value")?;
    ensure(zero_one == 0.0 && pm == 2.0, || format!("{zero_one}, {pm}"))?;
    Ok("0 and 2".into())
}

/// 200 random systems with ξ in 1..=6; each side gets max(count, ξ) vectors.
fn round_trip_systems() -> Vec<GramSystem> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    (0..200)
        .map(|k| {
            let xi = 1 + k % 6;
            let m = rng.random_range(1..=5);
            let n = rng.random_range(1..=5);
            let dim = xi + rng.random_range(0..3);
            random_system(&mut rng, xi, m, n, dim)
        })
        .collect()
}

fn realization_round_trip() -> Result<String, String> {
    let mut worst = 0.0f64;
    for g in round_trip_systems() {
        let r = realize(&g).map_err(|e| e.to_string())?;
        worst = worst.max(verify(&r, &g).map_err(|e| e.to_string())?);
    }
    ensure(worst <= 1e-9, || format!("max deviation {worst:e}"))?;
    let r = realize(&chsh_gram()).map_err(|e| e.to_string())?;
    let grid = expectation_grid(&r).map_err(|e| e.to_string())?;
    let expect = [[S, S], [S, -S]];
    for i in 0..2 {
        for j in 0..2 {
            ensure((grid.values[i][j] - expect[i][j]).abs() <= 1e-12, || format!("grid {:?}", grid.values))?;
        }
    }
    let e = bipartite_expectation(&build_state(1), &planar_observable([0.0, 1.0]), &planar_observable([S, S]))
        .map_err(|e| e.to_string())?;
    ensure((e.re - S).abs() <= 1e-12 && e.im.abs() <= 1e-12, || format!("{e}"))?;
    Ok(format!("max deviation {worst:.1e}"))
}

fn stabilizer_pipeline() -> Result<String, String> {
    let mut worst = 0.0f64;
    for nu in 1..=5 {
        let t = verify_transform(nu).map_err(|e| e.to_string())?;
        let product = t.l.mul(&t.e).and_then(|le| le.mul(&t.r)).map_err(|e| e.to_string())?;
        ensure(t.l.is_symplectic(), || format!("ν={nu}: L not symplectic"))?;
        ensure(t.r.inverse().is_some(), || format!("ν={nu}: R singular"))?;
        ensure(product == t.f, || format!("ν={nu}: L·E·R ≠ F"))?;
        let psi = singlet_graph_state(nu).map_err(|e| e.to_string())?;
        let g = weyl_brauer(nu, GeneratorForm::ZForm).map_err(|e| e.to_string())?;
        let signs = eigen_sign_check(&psi, &g).map_err(|e| e.to_string())?;
        ensure(signs == expected_signs(nu), || format!("ν={nu}: signs {signs:?}"))?;
        let res = eigen_residual(&psi, &g);
        ensure(res <= 1e-10, || format!("ν={nu}: residual {res:e}"))?;
        worst = worst.max(res);
    }
    Ok(format!("ν ≤ 5, max residual {worst:.1e}"))
}

fn orthogonality() -> Result<String, String> {
    let mut worst = 0.0f64;
    for nu in 1..=4 {
        let psi = build_state(nu);
        let signs = expected_signs(nu);
        for form in [GeneratorForm::XForm, GeneratorForm::ZForm] {
            let g = weyl_brauer(nu, form).map_err(|e| e.to_string())?;
            let mats: Vec<_> = g.generators().iter().map(|p| p.to_matrix()).collect();
            for (k, xk) in mats.iter().enumerate() {
                for (l, xl) in mats.iter().enumerate() {
                    let e = bipartite_expectation(&psi, xk, xl).map_err(|e| e.to_string())?;
                    let expect = if k == l { 1.0 - 2.0 * f64::from(signs[l]) } else { 0.0 };
                    worst = worst.max((e - Complex64::new(expect, 0.0)).norm());
                }
            }
        }
    }
    ensure(worst <= 1e-10, || format!("max error {worst:e}"))?;
    Ok(format!("ν ≤ 4, max error {worst:.1e}"))
}

/// Partially entangled `cos θ|00⟩ + sin θ|11⟩` with `A = Z, X` and `B = cos φ Z ± sin φ X`.
fn biased_chsh_outcome() -> CorrelationOutcome {
    let (theta, phi) = (std::f64::consts::PI / 8.0, std::f64::consts::PI / 4.0);
    let c2 = (2.0 * theta).cos();
    let s2 = (2.0 * theta).sin();
    let (c, s) = (phi.cos(), phi.sin());
    CorrelationOutcome::new(
        Scenario::new(2, 2).unwrap(),
        Convention::PmOne,
        vec![c2, 0.0],
        vec![c * c2, c * c2],
        vec![c, c, s * s2, -s * s2],
    )
    .unwrap()
}

fn no_signalling_examples() -> Result<String, String> {
    let x: CorrelationOutcome = serde_json::from_str(&std::fs::read_to_string(data("rmet_violation.json")).unwrap())
        .map_err(|e| e.to_string())?;
    let report = no_signalling_check(&x);
    ensure(
        report.violations.first().map(|v| v.inequality) == Some(RsmInequality::ALL[0]),
        || format!("{report:?}"),
    )?;
    let biased = biased_chsh_outcome();
    ensure(no_signalling_check(&biased).is_satisfied(), || "biased outcome violates RMet".into())?;
    let verdict = elliptope_membership(&ElliptopeGraph::bipartite(&biased.joint_rows()), &SdpOptions::default())
        .map_err(|e| e.to_string())?;
    ensure(matches!(verdict, ElliptopeVerdict::Inside { .. }), || format!("{verdict:?}"))?;
    Ok("(3/4,3/4,3/4) rejected; biased outcome passes both".into())
}

fn npa_checks() -> Result<String, String> {
    let opts = SdpOptions::default();
    let chsh = npa_bound_bell(&BellFunctional::chsh(), Level::One, &opts).map_err(|e| e.to_string())?.bound;
    ensure((chsh - (2f64.sqrt() - 1.0)).abs() <= 1e-3, || format!("level 1 CHSH {chsh}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let s = Scenario::new(2, 2).unwrap();
    for k in 0..50 {
        let mut draw = |len: usize| -> Vec<f64> { (0..len).map(|_| rng.random_range(-1.0..1.0)).collect() };
        let f = BellFunctional::new(s, Convention::ZeroOne, draw(2), draw(2), draw(4), 0.0).unwrap();
        let mut v = [0.0; 3];
        for (slot, level) in v.iter_mut().zip([Level::One, Level::OneAb, Level::Two]) {
            *slot = npa_bound_bell(&f, level, &opts).map_err(|e| e.to_string())?.bound;
        }
        ensure(v[2] <= v[1] + 1e-6 && v[1] <= v[0] + 1e-6, || format!("functional {k}: {v:?}"))?;
    }
    let half = vec![vec![0.5, 0.5]; 2];
    let corr = vec![vec![0.5, 0.0], vec![0.0, 0.5]];
    let anti = vec![vec![0.0, 0.5], vec![0.5, 0.0]];
    let pr = ProbabilityTable::from_parts(
        GeneralScenario::binary(2, 2),
        half.clone(),
        half,
        vec![vec![corr.clone(), corr.clone()], vec![corr, anti]],
    )
    .map_err(|e| e.to_string())?;
    let m = membership_check(&pr, Level::One, &opts).map_err(|e| e.to_string())?;
    ensure(!m.is_inside(), || format!("PR box {m:?}"))?;
    Ok(format!("CHSH {chsh:.5}; monotone on 50; PR box λ = {:.4}", m.lambda()))
}

fn i3322() -> Result<String, String> {
    let f = load("i3322.json");
    let opts = SdpOptions::default();
    let rmet = upper_bound_nc(&f, &opts).map_err(|e| e.to_string())?.bound;
    ensure((rmet - 0.3660).abs() <= 2e-3, || format!("elliptope∩RMet {rmet}"))?;
    let npa = npa_bound_bell(&f, Level::OneAb, &opts).map_err(|e| e.to_string())?.bound;
    ensure((0.25..=0.2509 + 1e-3).contains(&npa), || format!("NPA 1ab {npa}"))?;
    let plain = suspension_bound(&f, &opts).map_err(|e| e.to_string())?.bound;
    Ok(format!("elliptope {plain:.4}, ∩RMet {rmet:.4}, NPA 1ab {npa:.5}"))
}

fn jl() -> Result<String, String> {
    let k = jl_dimension(0.5, 100).map_err(|e| e.to_string())?;
    ensure(k == 222, || format!("jl_dimension(0.5, 100) = {k}"))?;
    let eps = 0.5;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_attempts = 0;
    for trial in 0..5 {
        let xi = 2 + trial % 3;
        let g = random_system(&mut rng, xi, 25, 25, 400);
        let (reduced, report) = jl_reduce(&g, eps, trial as u64).map_err(|e| e.to_string())?;
        ensure(report.dim_out < report.dim_in, || "no reduction happened".into())?;
        ensure(report.target_met && report.max_squared_norm_distortion <= eps, || format!("{report:?}"))?;
        worst_attempts = worst_attempts.max(report.attempts);
        let r = realize(&reduced).map_err(|e| e.to_string())?;
        let exact = g.cross_inner_products();
        let grid = expectation_grid(&r).map_err(|e| e.to_string())?;
        for (row_q, row_e) in grid.values.iter().zip(&exact) {
            for (q, e) in row_q.iter().zip(row_e) {
                ensure((q - e).abs() <= report.max_inner_product_error + 1e-9, || {
                    format!("expectation {q} vs {e}, reported error {}", report.max_inner_product_error)
                })?;
            }
        }
    }
    Ok(format!("K = 222; 50 points, ≤ {worst_attempts} attempts"))
}

fn entropy_of(r: &QuantumRealization) -> Result<f64, String> {
    r.entropy().map_err(|e| e.to_string())
}

fn entropy() -> Result<String, String> {
    let mut systems = round_trip_systems();
    systems.push(chsh_gram());
    let mut worst = 0.0f64;
    for g in &systems {
        let r = realize(g).map_err(|e| e.to_string())?;
        let expect = (r.xi() / 2) as f64;
        worst = worst.max((entropy_of(&r)? - expect).abs());
    }
    ensure(worst <= 1e-8, || format!("max entropy error {worst:e}"))?;
    Ok(format!("{} realizations, max error {worst:.1e}", systems.len()))
}

fn main() {
    let criteria = [
        Criterion { name: "CHSH elliptope bound", limit: Duration::from_secs(5), check: chsh_elliptope },
        Criterion { name: "CHSH elliptope∩RMet bound", limit: Duration::from_secs(10), check: chsh_elliptope_rmet },
        Criterion { name: "classical CHSH maximum", limit: Duration::from_secs(1), check: classical_chsh },
        Criterion { name: "realization round trip", limit: Duration::from_secs(30), check: realization_round_trip },
        Criterion { name: "stabilizer pipeline", limit: Duration::from_secs(20), check: stabilizer_pipeline },
        Criterion { name: "orthogonality identity", limit: Duration::from_secs(60), check: orthogonality },
        Criterion { name: "no-signalling counterexamples", limit: Duration::from_secs(1), check: no_signalling_examples },
        Criterion { name: "NPA hierarchy", limit: Duration::from_secs(60), check: npa_checks },
        Criterion { name: "I3322 bounds", limit: Duration::from_secs(600), check: i3322 },
        Criterion { name: "Johnson-Lindenstrauss reduction", limit: Duration::from_secs(60), check: jl },
        Criterion { name: "entanglement entropy", limit: Duration::from_secs(60), check: entropy },
    ];
    let mut failed = 0;
    for (k, c) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = (c.check)();
        let took = start.elapsed();
        let outcome = outcome.and_then(|msg| {
            if took <= c.limit {
                Ok(msg)
            } else {
                Err(format!("{msg}; took {took:.2?}, limit {:?}", c.limit))
            }
        });
        match outcome {
            Ok(msg) => println!("[PASS] {:>2} {}: {msg} ({took:.2?})", k + 1, c.name),
            Err(msg) => {
                failed += 1;
                println!("[FAIL] {:>2} {}: {msg} ({took:.2?})", k + 1, c.name);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
