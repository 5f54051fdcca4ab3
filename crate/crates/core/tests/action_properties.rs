use maslov_core::actions::{
    equal_indices_flat, fiber_point_over, local_index, local_index_with, q_beta, q_beta_from,
    resonance_type, CircleActionSpec,
};
use maslov_core::bundle::ConnectionForm;
use maslov_core::forms::OneForm;
use maslov_core::random::{random_exact_form, random_so3, seeded, uniform};
use maslov_core::sphere::{
    hamiltonian_of_rotation, measure_r, Orientation, SO3Element, SphereBundle, SphereLevel,
    SpherePoint, SphereRotation,
};
use nalgebra::{DVector, Vector3};
use proptest::prelude::*;

fn weights() -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-3i64..=3, 1..=3)
}

fn axis() -> impl Strategy<Value = Vector3<f64>> {
    (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)
        .prop_filter("nonzero", |(x, y, z)| x * x + y * y + z * z > 1e-2)
        .prop_map(|(x, y, z)| Vector3::new(x, y, z).normalize())
}

fn pole(axis: &Vector3<f64>, sign: f64) -> DVector<f64> {
    DVector::from_column_slice((axis * sign).as_slice())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn fixed_point_law_and_evenness(m in weights()) {
        let action = CircleActionSpec::<f64>::linear(m.clone()).unwrap();
        let k = local_index(&action, &DVector::zeros(2 * m.len())).unwrap();
        prop_assert_eq!(k, 2 * m.iter().sum::<i64>());
        prop_assert_eq!(k % 2, 0);
        prop_assert_eq!(resonance_type(&action, &DVector::zeros(2 * m.len())).unwrap(), m);
    }

    #[test]
    fn fixed_point_values_ignore_the_connection(seed in any::<u64>(), m in weights()) {
        let mut rng = seeded(seed);
        let dim = 2 * m.len();
        let action = CircleActionSpec::<f64>::linear(m.clone()).unwrap();
        let origin = DVector::zeros(dim);
        let expected = 2.0 * m.iter().sum::<i64>() as f64;
        for _ in 0..5 {
            let tau = random_exact_form(&mut rng, dim, 3, 4).plus(OneForm::liouville(uniform(&mut rng, -2.0, 2.0)));
            let q = q_beta(&action, &ConnectionForm::trivial(dim, tau).unwrap(), &origin).unwrap();
            prop_assert!((q.value - expected).abs() < 1e-6);
        }
    }

    #[test]
    fn sphere_pole_values_ignore_the_connection(seed in any::<u64>(), a in axis(), speed in -2i64..=2, level_two in any::<bool>()) {
        let mut rng = seeded(seed);
        let level = if level_two { SphereLevel::GammaSquared } else { SphereLevel::Gamma };
        let b = SphereBundle::new(Orientation::RightHanded, level);
        let action = CircleActionSpec::sphere(SphereRotation::new(a, speed).unwrap());
        for sign in [1.0, -1.0] {
            let p = pole(&a, sign);
            let reference = q_beta(&action, &ConnectionForm::sphere_invariant(b), &p).unwrap().value;
            prop_assert!((reference - (level.factor() * speed) as f64 * sign).abs() < 1e-6);
            for _ in 0..5 {
                let beta = ConnectionForm::sphere_perturbed(b, random_exact_form(&mut rng, 3, 2, 3)).unwrap();
                let q = q_beta(&action, &beta, &p).unwrap().value;
                prop_assert!((q - reference).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn q_does_not_depend_on_the_fiber_point(seed in any::<u64>(), a in axis(), theta in 0.0f64..1.0) {
        let mut rng = seeded(seed);
        let b = SphereBundle::gamma_squared(Orientation::RightHanded);
        let beta = ConnectionForm::sphere_perturbed(b, random_exact_form(&mut rng, 3, 2, 3)).unwrap();
        let action = CircleActionSpec::sphere(SphereRotation::about(a).unwrap());
        let frame: SO3Element<f64> = random_so3(&mut rng);
        let w0 = maslov_core::bundle::TotalSpacePoint::sphere(frame, b.level);
        let base = q_beta_from(&action, &beta, &w0).unwrap().value;
        for k in 0..5 {
            let w = beta.structural_action(&w0, theta + k as f64 * 0.17).unwrap();
            prop_assert!((q_beta_from(&action, &beta, &w).unwrap().value - base).abs() < 1e-10);
        }

        let lin = CircleActionSpec::<f64>::linear(vec![1, 2]).unwrap();
        let tb = ConnectionForm::trivial(4, OneForm::liouville(1.0)).unwrap();
        let x = DVector::from_column_slice(&[0.3, -0.2, 0.1, 0.4]);
        let w0 = fiber_point_over(&tb, &x).unwrap();
        let base = q_beta_from(&lin, &tb, &w0).unwrap().value;
        for k in 0..5 {
            let w = tb.structural_action(&w0, theta + k as f64 * 0.17).unwrap();
            prop_assert!((q_beta_from(&lin, &tb, &w).unwrap().value - base).abs() < 1e-10);
        }
    }

    #[test]
    fn flat_orbits_share_one_index(seed in any::<u64>(), m in weights()) {
        prop_assume!(m.contains(&0));
        let r = equal_indices_flat::<f64>(&m, 10, seed).unwrap();
        prop_assert!(r.all_equal);
        let distinct: std::collections::BTreeSet<i64> = r.indices.iter().copied().collect();
        prop_assert!(distinct.len() <= 1);
    }

    #[test]
    fn orientation_flip_negates_sphere_indices(a in axis(), speed in -2i64..=2) {
        let action = CircleActionSpec::sphere(SphereRotation::new(a, speed).unwrap());
        for sign in [1.0, -1.0] {
            let p = pole(&a, sign);
            let k = local_index_with(&action, &p, Orientation::RightHanded).unwrap();
            let flipped = local_index_with(&action, &p, Orientation::Reversed).unwrap();
            prop_assert_eq!(k, -flipped);
            prop_assert_eq!(k, 2 * speed * sign as i64);
        }
    }

    #[test]
    fn critical_values_lie_in_the_lattice(seed in any::<u64>(), a in axis(), speed in 1i64..=3) {
        let mut rng = seeded(seed);
        let beta = ConnectionForm::<f64>::sphere_invariant(SphereBundle::default());
        let frames: Vec<SO3Element<f64>> = (0..8).map(|_| random_so3(&mut rng)).collect();
        let r = measure_r(&beta, &frames).unwrap().r;
        let rot = SphereRotation::new(a, speed).unwrap();
        for sign in [1.0, -1.0] {
            let p = SpherePoint::new(a * sign).unwrap();
            // r·H is the connection on the period-one generator, an integer at fixed points
            let rh = r * hamiltonian_of_rotation(&beta, r, &rot.generator(), &p).unwrap();
            prop_assert!((rh - rh.round()).abs() < 1e-6, "r*H = {rh}");
            prop_assert!(rh.round() != 0.0);
        }
    }
}
