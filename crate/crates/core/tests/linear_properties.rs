use maslov_core::grassmann::{
    concat, det_squared, loop_degree, maslov_index, unitarity_defect, unitary_of_frame,
    LagrangianFrame, Phase, SampledLoop,
};
use maslov_core::random::{
    gaussian_vector, random_exact_form, random_lagrangian, random_orthogonal, random_spd,
    random_unitary, seeded,
};
use maslov_core::symplin::{
    average_metric, build_compatible_j, linear_action_matrix, sqrt_spd, standard_symplectic,
    CompatibleTriple, GroupSampler,
};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn weights(n: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-3i64..=3, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn averaged_triple_commutes_with_the_group(seed in any::<u64>(), m in (1usize..=3).prop_flat_map(weights)) {
        let mut rng = seeded(seed);
        let n = m.len();
        let omega = standard_symplectic::<f64>(n).unwrap();
        let sampler = GroupSampler::circle(&m, 64).unwrap();
        let gbar = average_metric(&random_spd(&mut rng, 2 * n), &sampler).unwrap();
        let triple = build_compatible_j(&omega, &gbar).unwrap();
        let (j2, pres, asym, min) = triple.invariant_defects();
        prop_assert!(j2 < 1e-10 && pres < 1e-10 && asym < 1e-10 && min > 0.0);
        let gj = triple.metric_j();
        for h in sampler.samples() {
            prop_assert!((h * triple.j() - triple.j() * h).norm() < 1e-9);
            prop_assert!((h.transpose() * &gj * h - &gj).norm() < 1e-9);
        }
        let again = average_metric(&gbar, &sampler).unwrap();
        prop_assert!((again.matrix() - gbar.matrix()).norm() < 1e-10);
    }

    #[test]
    fn torus_averaging_is_idempotent(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let sampler = GroupSampler::<f64>::torus(&[vec![1, 0], vec![1, 2]], 16).unwrap();
        let gbar = average_metric(&random_spd(&mut rng, 4), &sampler).unwrap();
        let again = average_metric(&gbar, &sampler).unwrap();
        prop_assert!((again.matrix() - gbar.matrix()).norm() < 1e-10);
    }

    #[test]
    fn spd_square_root_squares_back(seed in any::<u64>(), dim in 1usize..=6) {
        let mut rng = seeded(seed);
        let g = random_spd::<f64, _>(&mut rng, dim);
        let s = sqrt_spd(g.matrix()).unwrap();
        prop_assert!((&s * &s - g.matrix()).norm() < 1e-10 * g.matrix().norm().max(1.0));
        prop_assert!((&s - s.transpose()).norm() < 1e-12 * s.norm());
    }

    #[test]
    fn compatible_metric_is_positive(seed in any::<u64>(), n in 1usize..=3) {
        let mut rng = seeded(seed);
        let omega = standard_symplectic::<f64>(n).unwrap();
        let triple = build_compatible_j(&omega, &random_spd(&mut rng, 2 * n)).unwrap();
        let gj = triple.metric_j();
        let sym = (&gj + gj.transpose()) * 0.5;
        prop_assert!(sym.symmetric_eigenvalues().min() > 0.0);
    }

    #[test]
    fn det_squared_ignores_real_rotations(seed in any::<u64>(), n in 1usize..=4) {
        let mut rng = seeded(seed);
        let u = random_unitary::<f64, _>(&mut rng, n);
        let o: DMatrix<f64> = random_orthogonal(&mut rng, n);
        let rotated = u.times_real(&o).unwrap();
        prop_assert!(det_squared(&rotated).distance(&det_squared(&u)) < 1e-12);
    }

    #[test]
    fn random_lagrangian_frames_give_unitary_matrices(seed in any::<u64>(), n in 1usize..=3) {
        let mut rng = seeded(seed);
        let omega = standard_symplectic::<f64>(n).unwrap();
        let triple = build_compatible_j(&omega, &random_spd(&mut rng, 2 * n)).unwrap();
        let f = random_lagrangian(&mut rng, &omega).unwrap();
        let u = unitary_of_frame(&f, &triple).unwrap();
        prop_assert!(unitarity_defect(u.matrix()) < 1e-10);
    }

    #[test]
    fn degree_is_additive_under_concatenation(a in -4i64..=4, b in -4i64..=4) {
        let la = SampledLoop::uniform(64, |t| Phase::<f64>::from_turns(a as f64 * t)).unwrap();
        let lb = SampledLoop::uniform(64, |t| Phase::<f64>::from_turns(b as f64 * t)).unwrap();
        let both = concat(&la, &lb).unwrap();
        prop_assert_eq!(loop_degree(&both).unwrap().degree, a + b);
    }

    #[test]
    fn refinement_never_changes_the_degree(k in -3i64..=3, amp in 0.0f64..0.4, freq in 1u32..=3, n in 16usize..=64) {
        let phase = |t: f64| {
            Phase::<f64>::from_turns(k as f64 * t + amp * (2.0 * std::f64::consts::PI * freq as f64 * t).sin())
        };
        let coarse = loop_degree(&SampledLoop::uniform(n, phase).unwrap());
        let fine = loop_degree(&SampledLoop::uniform(2 * n, phase).unwrap()).unwrap();
        if let Ok(c) = coarse {
            prop_assert_eq!(c.degree, fine.degree);
        }
        prop_assert_eq!(fine.degree, k);
    }

    #[test]
    fn index_does_not_depend_on_the_section(seed in any::<u64>(), m in (1usize..=2).prop_flat_map(weights)) {
        let mut rng = seeded(seed);
        let n = m.len();
        let triple = CompatibleTriple::<f64>::standard(n).unwrap();
        let start = random_lagrangian(&mut rng, triple.omega()).unwrap();
        // small orbits keep the section phase resolved at this sampling
        let x0: DVector<f64> = gaussian_vector(&mut rng, 2 * n) * 0.3;
        let intervals = 256 * (1 + m.iter().map(|w| w.unsigned_abs() as usize).max().unwrap());
        let base = SampledLoop::uniform(intervals, |t| linear_action_matrix(&m, t) * &x0).unwrap();
        let frames = SampledLoop::try_uniform(intervals, |t| {
            start.transformed(&linear_action_matrix(&m, t), triple.omega())
        })
        .unwrap();
        let expected = 2 * m.iter().sum::<i64>();
        for _ in 0..5 {
            let tau = random_exact_form(&mut rng, 2 * n, 3, 4);
            let d = maslov_index(&frames, Some(&base), &triple, &tau).unwrap();
            prop_assert_eq!(d.degree, expected);
        }
    }
}

#[test]
fn constant_plane_has_index_zero() {
    let triple = CompatibleTriple::<f64>::standard(2).unwrap();
    let f = LagrangianFrame::horizontal(2).unwrap();
    let frames = SampledLoop::uniform(16, |_| f.clone()).unwrap();
    let d = maslov_index(&frames, None, &triple, &maslov_core::forms::OneForm::Zero).unwrap();
    assert_eq!(d.degree, 0);
}
