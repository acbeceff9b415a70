//! Property tests across the public API: format round-trips, generator
//! invariants, the exact bridge identities and profile invariants.

use proptest::prelude::*;

use tourncycles::count;
use tourncycles::generators::{self, BlowupParams};
use tourncycles::rng::Seed;
use tourncycles::spectral;
use tourncycles::trn;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn trn_round_trip(n in 1usize..=64, seed in any::<u64>()) {
        let t = generators::uniform(n, Seed(seed)).unwrap();
        let text = trn::write_trn(&t);
        let back = trn::read_trn(&text).unwrap();
        prop_assert!(back == t);
        prop_assert_eq!(trn::write_trn(&back), text);
    }

    #[test]
    fn generators_validate_and_are_deterministic(n in 1usize..=40, seed in any::<u64>()) {
        let t = generators::uniform(n, Seed(seed)).unwrap();
        prop_assert!(t.validate().is_empty());
        prop_assert!(generators::uniform(n, Seed(seed)).unwrap() == t);

        let z = 0.3 + (seed % 7) as f64 * 0.1;
        let b = BlowupParams::new(z, n, Seed(seed)).unwrap();
        let t = generators::blowup(&b);
        prop_assert!(t.validate().is_empty());
        prop_assert!(generators::blowup(&b) == t);

        let xi = (seed % 6) as f64 * 0.1;
        prop_assert!(generators::circular(xi, n).unwrap().validate().is_empty());
    }

    #[test]
    fn potential_outputs_validate(n in 2usize..=30, seed in any::<u64>()) {
        let rng = tourncycles::rng::IndexedRng::new(Seed(seed));
        let p: Vec<f64> = (0..n).map(|i| 0.5 * rng.unit(i as u64)).collect();
        let t = generators::potential(&p, Seed(seed ^ 1)).unwrap();
        prop_assert!(t.validate().is_empty());
        let a = generators::potential_matrix(&p).unwrap();
        let w = generators::wrandom(&a, n, Seed(seed ^ 1)).unwrap();
        prop_assert!(w == t, "matrix sampling at N = n matches the potential generator");
    }

    #[test]
    fn homs_divisibility_and_reversal(n in 3usize..=24, seed in any::<u64>()) {
        let t = generators::uniform(n, Seed(seed)).unwrap();
        let r = t.reverse();
        for ell in 3usize..=5 {
            let h = count::cycle_homs(&t, ell).unwrap();
            prop_assert_eq!(h % ell as u64, 0);
            prop_assert_eq!(count::cycle_homs(&r, ell).unwrap(), h);
        }
        for k in 3usize..=4 {
            prop_assert_eq!(
                count::trans_count(&r, k).unwrap(),
                count::trans_count(&t, k).unwrap()
            );
        }
    }

    #[test]
    fn bridge_identities_random(n in 1usize..=40, seed in any::<u64>()) {
        let t = generators::uniform(n, Seed(seed)).unwrap();
        let a = t.to_matrix();
        let h3 = count::cycle_homs(&t, 3).unwrap();
        let h4 = count::cycle_homs(&t, 4).unwrap();
        let s3 = count::sigma(&a, 3).unwrap();
        let s4 = count::sigma(&a, 4).unwrap();
        prop_assert!((s3 - count::sigma3_from_counts(n, h3)).abs() < 1e-12);
        prop_assert!((s4 - count::sigma4_from_counts(n, h3, h4)).abs() < 1e-12);
        let report = count::density_report(&t).unwrap();
        prop_assert!(report.t3 <= 0.125 + 1e-15);
        prop_assert!((report.sigma3 - s3).abs() < 1e-12);
    }

    #[test]
    fn profile_invariants_random(n in 2usize..=28, seed in any::<u64>()) {
        let t = generators::uniform(n, Seed(seed)).unwrap();
        let a = t.to_matrix();
        let p = spectral::skew_decompose(&a).unwrap();
        prop_assert_eq!(p.pairs.len(), n / 2);
        prop_assert_eq!(p.alpha_extra.is_some(), n % 2 == 1);
        prop_assert!((p.cos2_sum() - 1.0).abs() < 1e-9);
        let s2 = p.sum_lambda2_cos2();
        prop_assert!(p.sum_lambda4() >= s2 * s2 - 1e-9);
        for ell in [3usize, 4] {
            let direct = count::sigma(&a, ell).unwrap();
            let recon = spectral::reconstruct_sigma(&p, ell).unwrap();
            prop_assert!((direct - recon).abs() < 1e-9);
        }
    }
}
