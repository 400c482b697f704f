use abc_core::bounds::{radical_class_bound, BoundEvaluation};
use abc_core::hp::Dyadic;
use abc_core::search::{census, coprime_pair_count, enumerate_exceptional, fit_exponent};
use abc_core::sieve::{squarefree_list, totient_table, SieveConfig, Storage};
use abc_core::{divisor_count, enumerate_radical_class, radical, BoundParams, Ratio, SieveTables};
use proptest::prelude::*;

fn ratio(p: u64, q: u64) -> Ratio {
    Ratio::new(p, q).unwrap()
}

#[test]
fn counts_are_monotone_in_n_and_epsilon() {
    let grid = [100, 1_000, 10_000, 30_000];
    let mut previous: Option<Vec<u64>> = None;
    for eps in [ratio(1, 20), ratio(1, 10), ratio(1, 5), ratio(3, 10)] {
        let rep = census(&BoundParams::new(eps, 30_000).unwrap(), &grid, 1, false).unwrap();
        let counts: Vec<u64> = rep.grid.iter().map(|r| r.count_canonical).collect();
        assert!(counts.windows(2).all(|w| w[0] <= w[1]), "ε = {eps}: {counts:?}");
        assert!(rep.grid.iter().all(|r| r.count_ordered == 2 * r.count_canonical));
        if let Some(prev) = &previous {
            assert!(prev.iter().zip(&counts).all(|(a, b)| a >= b), "ε = {eps}");
        }
        previous = Some(counts);
    }
}

#[test]
fn fitted_exponent_from_oracle_counts() {
    // |E(N, 1/10)| at N = 10^2..10^5, from the exhaustive naive scan.
    let counts = [(100u64, 4.0), (1_000, 12.0), (10_000, 43.0), (100_000, 130.0)];
    let slope = fit_exponent(&counts).unwrap();
    assert!((slope - 0.5089937292468585).abs() < 1e-12, "{slope}");
    assert!(slope < 2.0 / 3.0);
}

#[test]
fn every_exceptional_triple_satisfies_the_quality_criterion() {
    let eps = ratio(1, 10);
    for t in enumerate_exceptional(&BoundParams::new(eps, 20_000).unwrap()).unwrap() {
        assert!(t.quality > 1.0 / (1.0 - eps.to_f64()) - 1e-12);
        assert_eq!(t.a + t.b, t.c);
        assert_eq!(t.rad_abc, (radical(t.a).unwrap() * radical(t.b).unwrap() * radical(t.c).unwrap()) as u128);
    }
}

#[test]
fn coprime_identity_up_to_ten_thousand() {
    let phi = totient_table(10_000);
    let mut sum = 0u64;
    for n in 2..=10_000u64 {
        sum += phi[n as usize];
        if n % 97 == 0 || n == 10_000 {
            assert_eq!(coprime_pair_count(n).unwrap(), sum, "N = {n}");
        }
    }
}

#[test]
fn narrow_storage_matches_wide() {
    let wide = SieveTables::build(200_000).unwrap();
    let cfg = SieveConfig { storage: Storage::U32, ..Default::default() };
    let narrow = SieveTables::build_with(200_000, &cfg).unwrap();
    assert!((1..=200_000).all(|n| wide.rad(n) == narrow.rad(n) && wide.tau(n) == narrow.tau(n)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sieve_matches_trial_division(n in 2u64..20_000, threads in 1usize..4) {
        let cfg = SieveConfig { threads, segment_len: 1 + n as usize / 3, ..Default::default() };
        let t = SieveTables::build_with(n, &cfg).unwrap();
        for m in (1..=n).step_by(7).chain([n]) {
            prop_assert_eq!(t.rad(m), radical(m).unwrap());
            prop_assert_eq!(t.tau(m), divisor_count(m).unwrap());
        }
    }

    #[test]
    fn radical_class_bound_holds(idx in 0usize..6000, n in 1u64..200_000, q in 2u64..12, p_seed in 0u64..100) {
        let pool = squarefree_list(10_000);
        let r = pool[idx % pool.len()];
        let eps = ratio(1 + p_seed % (q - 1), q);
        let count = enumerate_radical_class(r, n).unwrap().len() as u64;
        let bound = radical_class_bound(r, n, eps).unwrap();
        prop_assert!(bound.certainly_at_least(&Dyadic::from(count)));
    }

    #[test]
    fn divisor_bound_holds(n in 1u64..10_000_000, q in 2u64..6) {
        let eps = ratio(1, q);
        let b = BoundEvaluation::divisor(n, eps).unwrap().bound_value;
        prop_assert!(b.certainly_at_least(&Dyadic::from(divisor_count(n).unwrap())));
    }
}
