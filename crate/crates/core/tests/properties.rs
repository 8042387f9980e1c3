use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use subsep::rng::{gaussian_matrix, standard_normal, stream};
use subsep::verify::expected_spectrum;
use subsep::{
    brute_force_separable, certify_binary, generate_uos_dataset, principal_angles,
    projection_classifier, projection_difference_spectrum, sample_feature_map, sample_stiefel,
    train_probe, width_bound_binary, Activation, RandomFeatureMap, Subspace, UnionOfSubspaces,
};

fn pair(d: usize, r: usize, seed: u64) -> (Subspace<f64>, Subspace<f64>) {
    let mut rng = stream(seed, &[0]);
    (
        sample_stiefel(d, r, &mut rng).unwrap(),
        sample_stiefel(d, r, &mut rng).unwrap(),
    )
}

fn quadratic_map(width: usize, d: usize, seed: u64) -> RandomFeatureMap<f64> {
    sample_feature_map(
        width,
        d,
        Activation::Quadratic,
        1.0,
        &mut stream(seed, &[1]),
    )
    .unwrap()
}

fn orthogonal(r: usize, seed: u64) -> DMatrix<f64> {
    sample_stiefel::<f64, _>(r, r, &mut stream(seed, &[2]))
        .unwrap()
        .into_basis()
}

fn vector(n: usize, seed: u64, tag: u64) -> DVector<f64> {
    let mut rng = stream(seed, &[3, tag]);
    DVector::from_fn(n, |_, _| standard_normal(&mut rng))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn angles_are_symmetric(d in 2usize..14, r in 1usize..5, seed in any::<u64>()) {
        prop_assume!(r <= d);
        let (s1, s2) = pair(d, r, seed);
        let a = principal_angles(&s1, &s2).unwrap();
        let b = principal_angles(&s2, &s1).unwrap();
        for (x, y) in a.angles().iter().zip(b.angles()) {
            prop_assert!((x - y).abs() < 1e-7);
        }
    }

    #[test]
    fn angles_ignore_the_choice_of_basis(d in 2usize..14, r in 1usize..5, seed in any::<u64>()) {
        prop_assume!(r <= d);
        let (s1, s2) = pair(d, r, seed);
        let q1 = orthogonal(r, seed);
        let q2 = orthogonal(r, seed.wrapping_add(1));
        let a = principal_angles(&s1, &s2).unwrap();
        let b = principal_angles(&s1.rotate_basis(&q1).unwrap(), &s2.rotate_basis(&q2).unwrap()).unwrap();
        for (x, y) in a.angles().iter().zip(b.angles()) {
            prop_assert!((x - y).abs() < 1e-7, "{:?} vs {:?}", a.angles(), b.angles());
        }
    }

    #[test]
    fn spectrum_is_plus_minus_sines(r in 1usize..6, extra in 1usize..8, seed in any::<u64>()) {
        let d = 2 * r + extra;
        let (s1, s2) = pair(d, r, seed);
        let spectrum = projection_difference_spectrum(&s1, &s2).unwrap();
        let expected = expected_spectrum(d, &principal_angles(&s1, &s2).unwrap().sines());
        for (x, y) in spectrum.iter().zip(&expected) {
            prop_assert!((x - y).abs() < 1e-9, "{spectrum:?} vs {expected:?}");
        }
    }

    #[test]
    fn stiefel_is_reproducible(d in 1usize..12, r in 1usize..6, seed in any::<u64>()) {
        prop_assume!(r <= d);
        let a = sample_stiefel::<f64, _>(d, r, &mut stream(seed, &[])).unwrap();
        let b = sample_stiefel::<f64, _>(d, r, &mut stream(seed, &[])).unwrap();
        prop_assert_eq!(a.basis().as_slice(), b.basis().as_slice());
    }

    #[test]
    fn quadratic_features_are_even_and_two_homogeneous(
        width in 1usize..40,
        d in 1usize..10,
        c in -5.0f64..5.0,
        seed in any::<u64>(),
    ) {
        let map = quadratic_map(width, d, seed);
        let x = vector(d, seed, 0);
        let fx = map.apply(&x).unwrap();
        prop_assert_eq!(&map.apply(&(-&x)).unwrap(), &fx);
        let fcx = map.apply(&(&x * c)).unwrap();
        for (a, b) in fcx.iter().zip(fx.iter()) {
            prop_assert!((a - c * c * b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn relu_features_are_positively_homogeneous(
        width in 1usize..40,
        d in 1usize..10,
        c in 0.0f64..5.0,
        seed in any::<u64>(),
    ) {
        let map = quadratic_map(width, d, seed).with_activation(Activation::Relu).unwrap();
        let x = vector(d, seed, 0);
        let fx = map.apply(&x).unwrap();
        let fcx = map.apply(&(&x * c)).unwrap();
        for (a, b) in fcx.iter().zip(fx.iter()) {
            prop_assert!((a - c * b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn sign_weighted_features_are_the_quadratic_form(
        d in 4usize..12,
        r in 1usize..3,
        width in 1usize..200,
        seed in any::<u64>(),
    ) {
        let (s1, s2) = pair(d, r, seed);
        let map = quadratic_map(width, d, seed);
        let cert = certify_binary(&map, &s1, &s2).unwrap();
        let alpha = vector(r, seed, 1);
        for (s, q) in [(&s1, &cert.q1), (&s2, &cert.q2)] {
            let f = map.apply(&s.point(&alpha)).unwrap();
            let lhs = cert.v.dot(f.as_slice());
            let rhs = (alpha.transpose() * q * &alpha)[(0, 0)];
            let scale: f64 = f.iter().map(|x| x.abs()).sum();
            prop_assert!((lhs - rhs).abs() <= 1e-8 * scale.max(1e-300), "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn scaling_weights_keeps_the_verdict(
        d in 4usize..10,
        r in 1usize..3,
        width in 1usize..120,
        c in 0.01f64..100.0,
        seed in any::<u64>(),
    ) {
        let (s1, s2) = pair(d, r, seed);
        let map = quadratic_map(width, d, seed);
        let a = certify_binary(&map, &s1, &s2).unwrap();
        let b = certify_binary(&map.scaled(c).unwrap(), &s1, &s2).unwrap();
        prop_assert_eq!(a.separable, b.separable);
        prop_assert_eq!(a.v, b.v);
    }

    #[test]
    fn width_bound_monotonicity(
        r in 1usize..8,
        t1 in 0.05f64..1.5,
        shrink in 0.1f64..0.99,
        delta in 0.01f64..0.5,
    ) {
        let theta = vec![t1; r];
        let base = width_bound_binary(r, &theta, delta).unwrap();
        prop_assert!(base.min_width >= 1);
        prop_assert!(base.gamma1 > 0.0 && base.gamma1 <= base.gamma2 && base.gamma2 <= 1.0);
        let mut smaller = theta.clone();
        smaller[0] *= shrink;
        prop_assert!(width_bound_binary(r, &smaller, delta).unwrap().raw_width > base.raw_width);
        prop_assert!(width_bound_binary(r, &theta, delta / 2.0).unwrap().raw_width > base.raw_width);
        let wider = vec![t1; r + 1];
        prop_assert!(width_bound_binary(r + 1, &wider, delta).unwrap().raw_width > base.raw_width);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn certified_maps_separate_random_points(
        d in 4usize..10,
        r in 1usize..3,
        width in 40usize..400,
        seed in any::<u64>(),
    ) {
        let (s1, s2) = pair(d, r, seed);
        let map = quadratic_map(width, d, seed);
        let cert = certify_binary(&map, &s1, &s2).unwrap();
        prop_assume!(cert.separable);
        let alphas = gaussian_matrix::<f64, _>(10_000, r, 1.0, &mut stream(seed, &[4]));
        for alpha in alphas.row_iter() {
            let alpha = alpha.transpose();
            let pos = map.apply(&s1.point(&alpha)).unwrap();
            let neg = map.apply(&s2.point(&alpha)).unwrap();
            prop_assert!(cert.v.dot(pos.as_slice()) > 0.0);
            prop_assert!(cert.v.dot(neg.as_slice()) < 0.0);
        }
    }

    #[test]
    fn certificates_have_no_false_positives(width in 2usize..13, seed in any::<u64>()) {
        let (s1, s2) = pair(6, 2, seed);
        let map = quadratic_map(width, 6, seed);
        if certify_binary(&map, &s1, &s2).unwrap().separable {
            prop_assert!(brute_force_separable(&map, &s1, &s2).unwrap());
        }
    }

    #[test]
    fn classifier_ignores_activation(width in 1usize..50, seed in any::<u64>()) {
        let (s1, s2) = pair(6, 2, seed);
        let map = quadratic_map(width, 6, seed);
        let relu = map.with_activation(Activation::Relu).unwrap();
        prop_assert_eq!(
            projection_classifier(&map, &s1, &s2).unwrap(),
            projection_classifier(&relu, &s1, &s2).unwrap()
        );
    }

    #[test]
    fn probe_training_ignores_row_order(seed in any::<u64>(), shift in 1usize..40) {
        let mut rng = stream(seed, &[5]);
        let union = UnionOfSubspaces::<f64>::sample(3, 6, 2, &mut rng).unwrap();
        let data = generate_uos_dataset(&union, 15, &mut rng)
            .unwrap()
            .map_features(&quadratic_map(12, 6, seed))
            .unwrap();
        let n = data.len();
        let perm: Vec<usize> = (0..n).map(|i| (i * 7 + shift) % n).collect();
        prop_assume!({
            let mut p = perm.clone();
            p.sort_unstable();
            p.dedup();
            p.len() == n
        });
        let a = train_probe(&data, 25, 0.1).unwrap();
        let b = train_probe(&data.permuted(&perm), 25, 0.1).unwrap();
        prop_assert_eq!(a.weights().as_slice(), b.weights().as_slice());
    }
}
