mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tsirelson::correlation::{BellFunctional, Convention, Scenario};
use tsirelson::npa::{membership_check, npa_bound_bell, Level, ProbabilityTable};
use tsirelson::realization::{correlation_outcome, expectation_grid, realize};
use tsirelson::sdp::{split_witness, tsirelson_bound, SdpOptions};

use common::random_system;

#[test]
fn sdp_witness_realizes_the_tsirelson_value() {
    let f = BellFunctional::chsh_pm();
    let bound = tsirelson_bound(&f, &SdpOptions::default()).unwrap();
    let gram = split_witness(&bound.witness, 0, 2, 1e-6).unwrap();
    let r = realize(&gram).unwrap();
    let g = expectation_grid(&r).unwrap().values;
    let value = g[0][0] - g[0][1] - g[1][0] - g[1][1];
    assert!((value.abs() - 2.0 * 2f64.sqrt()).abs() < 1e-4, "{value}");
    assert!((value - bound.bound).abs() < 1e-4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn born_rule_behaviours_pass_every_level(seed in any::<u64>(), xi in 1usize..5, m in 1usize..3, n in 1usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_system(&mut rng, xi, m, n, xi + 1);
        let r = realize(&g).unwrap();
        let p = ProbabilityTable::from_outcome(&correlation_outcome(&r).unwrap());
        for level in [Level::One, Level::OneAb, Level::Two] {
            let verdict = membership_check(&p, level, &SdpOptions::default()).unwrap();
            prop_assert!(verdict.is_inside(), "{level}: {verdict:?}");
        }
    }

    #[test]
    fn npa_level_one_dominates_elliptope(joint in prop::collection::vec(-1.0f64..1.0, 4)) {
        let f = BellFunctional::new(Scenario::new(2, 2).unwrap(), Convention::PmOne, vec![0.0; 2], vec![0.0; 2], joint, 0.0)
            .unwrap();
        let opts = SdpOptions::default();
        let npa = npa_bound_bell(&f, Level::One, &opts).unwrap().bound;
        let ell = tsirelson_bound(&f, &opts).unwrap().bound;
        prop_assert!(npa >= ell - 1e-4, "{npa} < {ell}");
    }
}
