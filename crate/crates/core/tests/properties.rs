use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use pvlab::detection::{l1l2_test, spectral_norm_test, DEFAULT_C1};
use pvlab::lowdeg::{advantage, advantage_bruteforce};
use pvlab::model_gen::{
    apply_rotation, generate_instance, orthonormalize, sample_haar_rotation, BasisKind, BasisMatrix, InstanceParams,
    Model,
};
use pvlab::spectral::{build_statistic, estimate_direction, leading_eigenpair, score};
use pvlab::SeedSpec;

fn gaussian(rows: usize, cols: usize, seed: u64) -> BasisMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    BasisMatrix {
        data: DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal)),
        kind: BasisKind::Rotated,
    }
}

fn sorted_spectrum(m: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

fn model() -> impl Strategy<Value = Model> {
    prop_oneof![Just(Model::Gaussian), Just(Model::Orthonormal)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn generation_is_a_function_of_the_seed(
        n_amb in 20usize..200, n_sub in 1usize..6, rho in 0.05f64..1.0, m in model(), seed in any::<u64>(), stream in any::<u64>()
    ) {
        let p = InstanceParams::new(n_amb, n_sub, rho, m, SeedSpec::new(seed, stream));
        match (generate_instance(p), generate_instance(p)) {
            (Ok(a), Ok(b)) => {
                prop_assert_eq!(&a.observed.data, &b.observed.data);
                prop_assert_eq!(&a.truth.entries, &b.truth.entries);
            }
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "outcomes differ"),
        }
    }

    #[test]
    fn orthonormalize_is_orthonormal_and_spans(rows in 6usize..60, cols in 1usize..6, seed in any::<u64>()) {
        prop_assume!(cols <= rows);
        let y = gaussian(rows, cols, seed);
        let q = orthonormalize(&y).unwrap();
        let gram = q.data.transpose() * &q.data;
        prop_assert!((gram - DMatrix::identity(cols, cols)).amax() <= 1e-10);
        let projected = &q.data * (q.data.transpose() * &y.data);
        prop_assert!((projected - &y.data).amax() <= 1e-8);
    }

    #[test]
    fn statistic_spectrum_is_rotation_invariant(rows in 10usize..120, cols in 1usize..7, seed in any::<u64>(), centered in any::<bool>()) {
        let y = gaussian(rows, cols, seed);
        let q = sample_haar_rotation(cols, SeedSpec::new(seed, 1)).unwrap();
        let yq = apply_rotation(&y, &q).unwrap();
        let a = build_statistic(&y, centered);
        let b = build_statistic(&yq, centered);
        let scale = a.spectral_norm().max(1.0);
        for (x, z) in sorted_spectrum(&a.matrix).iter().zip(sorted_spectrum(&b.matrix)) {
            prop_assert!((x - z).abs() <= 1e-8 * scale);
        }
    }

    #[test]
    fn leading_eigenpair_residual_is_small(rows in 10usize..120, cols in 1usize..8, seed in any::<u64>()) {
        let m = build_statistic(&gaussian(rows, cols, seed), true).matrix;
        let (lambda, u, gap) = leading_eigenpair(&m).unwrap();
        let norm = m.clone().symmetric_eigen().eigenvalues.amax();
        prop_assert!((&m * &u - &u * lambda).norm() <= 1e-8 * norm.max(f64::MIN_POSITIVE));
        prop_assert!((lambda.abs() - norm).abs() <= 1e-10 * norm.max(1.0));
        prop_assert!(gap >= 0.0);
        prop_assert!((u.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn estimate_ignores_choice_of_orthonormal_basis(rho in 0.02f64..0.3, seed in any::<u64>()) {
        let p = InstanceParams::new(600, 5, rho, Model::Orthonormal, SeedSpec::new(seed, 0));
        prop_assume!(generate_instance(p).is_ok());
        let inst = generate_instance(p).unwrap();
        let q = sample_haar_rotation(5, SeedSpec::new(seed, 7)).unwrap();
        let other = apply_rotation(&inst.observed, &q).unwrap();
        let a = estimate_direction(&inst.observed).unwrap();
        let b = estimate_direction(&other).unwrap();
        prop_assume!(a.gap > 1e-9 * a.statistic.spectral_norm());
        let dev = (&a.raw_estimate - &b.raw_estimate).amax().min((&a.raw_estimate + &b.raw_estimate).amax());
        prop_assert!(dev <= 1e-6);
    }

    #[test]
    fn score_ignores_global_sign(est in prop::collection::vec(-1.0f64..1.0, 1..40), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = DVector::from_vec(est);
        let truth = DVector::from_fn(e.len(), |_, _| rng.sample::<f64, _>(StandardNormal));
        let a = score(&e, &truth).unwrap();
        let b = score(&(-&e), &truth).unwrap();
        prop_assert_eq!(a.l2_error, b.l2_error);
        prop_assert_eq!(a.entrywise_max_weighted, b.entrywise_max_weighted);
        prop_assert_eq!(a.exact_match, b.exact_match);
    }

    #[test]
    fn l1l2_decision_is_scale_free(x in prop::collection::vec(-3.0f64..3.0, 2..80), s in prop_oneof![-1e6f64..-1e-6, 1e-6f64..1e6]) {
        let x = DVector::from_vec(x);
        prop_assume!(x.norm() > 1e-6);
        let a = l1l2_test(&x, DEFAULT_C1).unwrap();
        let b = l1l2_test(&(&x * s), DEFAULT_C1).unwrap();
        prop_assert_eq!(a.decision, b.decision);
        prop_assert!((a.statistic_value - b.statistic_value).abs() <= 1e-9 * (1.0 + a.statistic_value.abs()));
    }

    #[test]
    fn spectral_test_value_is_rotation_invariant(rows in 20usize..150, cols in 1usize..6, rho in 0.01f64..1.0, seed in any::<u64>()) {
        let y = gaussian(rows, cols, seed);
        let q = sample_haar_rotation(cols, SeedSpec::new(seed, 3)).unwrap();
        let a = spectral_norm_test(&y, rho, DEFAULT_C1).unwrap();
        let b = spectral_norm_test(&apply_rotation(&y, &q).unwrap(), rho, DEFAULT_C1).unwrap();
        prop_assert!((a.statistic_value - b.statistic_value).abs() <= 1e-8 * a.statistic_value.max(1.0));
    }

    #[test]
    fn advantage_is_at_least_one_and_monotone(n_amb in 1usize..500, n_sub in 1usize..500, rho in 1e-3f64..1.0, d in 0usize..30) {
        let lo = advantage(n_amb, n_sub, rho, d).unwrap();
        let hi = advantage(n_amb, n_sub, rho, d + 2).unwrap();
        prop_assert!(lo.adv >= 1.0);
        prop_assert!(hi.ln_adv_squared >= lo.ln_adv_squared);
        if d <= 3 {
            prop_assert_eq!(lo.adv, 1.0);
        }
    }

    #[test]
    fn advantage_matches_brute_force_off_grid(n_amb in 1usize..=5, n_sub in 1usize..=6, rho in 0.05f64..=1.0, d in 0usize..=12) {
        let fast = advantage(n_amb, n_sub, rho, d).unwrap().adv;
        let slow = advantage_bruteforce(n_amb, n_sub, rho, d).unwrap();
        prop_assert!((fast - slow).abs() <= 1e-10 * slow);
    }
}
