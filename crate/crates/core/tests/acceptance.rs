//! Acceptance criteria 1 to 12. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails. Tolerances are fixed below.

use std::process::ExitCode;
use std::time::Instant;

use maslov_core::actions::{
    check_conservation, equal_indices_flat, local_index, local_index_with, momentum_map, q_beta,
    q_vector, CircleActionSpec, MomentumAction, SymplecticPotential, TorusActionSpec,
};
use maslov_core::bundle::{characteristic_number, ConnectionForm, TotalSpacePoint};
use maslov_core::forms::OneForm;
use maslov_core::grassmann::{loop_degree, maslov_index, LagrangianFrame, Phase, SampledLoop};
use maslov_core::random::{
    gaussian_vector, random_exact_form, random_so3, random_sphere_point, random_tangent, seeded,
};
use maslov_core::sphere::{
    clutching_degree, gamma_winding_pair, hamiltonian_of_rotation, measure_r, omega_s2,
    transitivity_rank, Orientation, SO3Element, SphereBundle, SphereLevel, SpherePoint,
    SphereRotation,
};
use maslov_core::symplin::{linear_action_matrix, CompatibleTriple};
use nalgebra::{DVector, Vector3};

const SEED: u64 = 7;

const C1_Q_TOL: f64 = 1e-8;
const C1_RUNTIME_S: f64 = 5.0;
const C2_RESIDUAL: f64 = 1e-10;
const C4_MAGNITUDE_TOL: f64 = 1e-3;
const C5_EVEN_TOL: f64 = 1e-6;
const C6_GRADIENT_TOL: f64 = 1e-6;
const C6_FD_STEP: f64 = 1e-5;
const C6_FIT_RESIDUAL: f64 = 1e-8;
const C7_MIN_SINGULAR: f64 = 1e-6;
const C8_EQUIVARIANCE_TOL: f64 = 1e-9;
const C8_SCALE_TOL: f64 = 1e-8;
const C9_DRIFT_TOL: f64 = 1e-8;
const C9_STEPS: usize = 512;
const C11_EVEN_TOL: f64 = 1e-6;

type Outcome = Result<String, String>;

fn dv(xs: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(xs)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn criterion_1(indices: &mut Vec<i64>) -> Outcome {
    let start = Instant::now();
    let cases: [(&[i64], i64); 4] = [(&[1], 2), (&[1, 1], 4), (&[2, -1], 2), (&[3, 0, -1], 4)];
    let mut rng = seeded(SEED);
    let mut worst = 0.0f64;
    for (m, expected) in cases {
        let action = CircleActionSpec::<f64>::linear(m.to_vec()).map_err(|e| e.to_string())?;
        let dim = action.dim();
        let origin = DVector::zeros(dim);
        let k = local_index(&action, &origin).map_err(|e| e.to_string())?;
        indices.push(k);
        ensure(k == expected, || format!("weights {m:?}: local index {k}, expected {expected}"))?;
        for _ in 0..5 {
            let tau = random_exact_form(&mut rng, dim, 3, 4)
                .plus(OneForm::liouville(rng_scale(&mut rng)));
            let beta = ConnectionForm::trivial(dim, tau).map_err(|e| e.to_string())?;
            let q = q_beta(&action, &beta, &origin).map_err(|e| e.to_string())?;
            worst = worst.max((q.value - expected as f64).abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(worst < C1_Q_TOL, || format!("q_beta deviates by {worst:e}"))?;
    ensure(secs < C1_RUNTIME_S, || format!("took {secs:.2} s"))?;
    Ok(format!("indices 2,4,2,4; max q_beta deviation {worst:.1e}; {secs:.2} s"))
}

fn rng_scale(rng: &mut maslov_core::random::SeededRng) -> f64 {
    maslov_core::random::uniform(rng, -2.0, 2.0)
}

fn criterion_2() -> Outcome {
    let mut worst = 0.0f64;
    for k in -3i64..=3 {
        let l = SampledLoop::uniform(64, |t| Phase::<f64>::from_turns(k as f64 * t))
            .map_err(|e| e.to_string())?;
        let d = loop_degree(&l).map_err(|e| e.to_string())?;
        ensure(d.degree == k, || format!("winding {k} read as {}", d.degree))?;
        worst = worst.max(d.residual);
    }
    ensure(worst < C2_RESIDUAL, || format!("residual {worst:e}"))?;
    Ok(format!("windings -3..3 exact, max residual {worst:.1e}"))
}

fn criterion_3() -> Outcome {
    let triple = CompatibleTriple::<f64>::standard(1).map_err(|e| e.to_string())?;
    let p0 = dv(&[0.7, 0.2]);
    let line = LagrangianFrame::<f64>::horizontal(1).map_err(|e| e.to_string())?;
    let base = SampledLoop::uniform(64, |t| linear_action_matrix(&[1], t) * &p0)
        .map_err(|e| e.to_string())?;
    let frames = SampledLoop::try_uniform(64, |t| {
        line.transformed(&linear_action_matrix(&[1], t), triple.omega())
    })
    .map_err(|e| e.to_string())?;
    let mut rng = seeded(SEED + 3);
    let mut found = Vec::new();
    for _ in 0..5 {
        let tau = random_exact_form(&mut rng, 2, 3, 4);
        let d = maslov_index(&frames, Some(&base), &triple, &tau).map_err(|e| e.to_string())?;
        found.push(d.degree);
    }
    ensure(found.iter().all(|&k| k == 2), || format!("indices {found:?}"))?;
    Ok(format!("indices {found:?}"))
}

fn criterion_4() -> Outcome {
    let bundle = SphereBundle::default();
    let beta = ConnectionForm::<f64>::sphere_invariant(bundle);
    let c = characteristic_number(&beta).map_err(|e| e.to_string())?;
    let clutch = clutching_degree::<f64>(&bundle, 256).map_err(|e| e.to_string())?;
    ensure((c.value.abs() - 2.0).abs() < C4_MAGNITUDE_TOL, || format!("value {}", c.value))?;
    ensure(c.nearest == -clutch, || {
        format!("integral {} disagrees with clutching degree {clutch}", c.nearest)
    })?;
    Ok(format!("integral {:.12}, clutching degree {clutch}", c.value))
}

fn criterion_5(indices: &mut Vec<i64>) -> Outcome {
    let action =
        CircleActionSpec::sphere(SphereRotation::about(Vector3::<f64>::z()).map_err(|e| e.to_string())?);
    let beta = ConnectionForm::sphere_invariant(SphereBundle::gamma_squared(Orientation::RightHanded));
    let mut got = Vec::new();
    for (p, expected) in [(dv(&[0.0, 0.0, 1.0]), 2i64), (dv(&[0.0, 0.0, -1.0]), -2)] {
        let q = q_beta(&action, &beta, &p).map_err(|e| e.to_string())?;
        let k = local_index(&action, &p).map_err(|e| e.to_string())?;
        indices.push(k);
        ensure((q.value - expected as f64).abs() < C5_EVEN_TOL && k == expected, || {
            format!("at {p:?}: Q {} local index {k}, expected {expected}", q.value)
        })?;
        got.push(q.value);
    }
    ensure(indices.iter().all(|k| k % 2 == 0), || format!("odd index among {indices:?}"))?;
    Ok(format!("k_N = {:.9}, k_S = {:.9}; all {} indices even", got[0], got[1], indices.len()))
}

fn criterion_6() -> Outcome {
    let mut rng = seeded(SEED + 6);
    let beta = ConnectionForm::<f64>::sphere_invariant(SphereBundle::default());
    let frames: Vec<SO3Element<f64>> = (0..20).map(|_| random_so3(&mut rng)).collect();
    let r = measure_r(&beta, &frames).map_err(|e| e.to_string())?.r;
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let p: SpherePoint<f64> = random_sphere_point(&mut rng);
        let v = Vector3::new(
            maslov_core::random::normal(&mut rng),
            maslov_core::random::normal(&mut rng),
            maslov_core::random::normal(&mut rng),
        );
        let e = random_tangent(&mut rng, &p);
        let along = |s: f64| SpherePoint::new(p.vector() * s.cos() + e * s.sin()).unwrap();
        let h = C6_FD_STEP;
        let dh = (hamiltonian_of_rotation(&beta, r, &v, &along(h)).map_err(|e| e.to_string())?
            - hamiltonian_of_rotation(&beta, r, &v, &along(-h)).map_err(|e| e.to_string())?)
            / (2.0 * h);
        let xv = v.cross(p.vector());
        let iota = omega_s2(&p, &xv, &e).map_err(|e| e.to_string())?;
        worst = worst.max((dh - iota).abs());
    }
    ensure(worst < C6_GRADIENT_TOL, || format!("gradient defect {worst:e}"))?;
    let pts: Vec<SpherePoint<f64>> = (0..100).map(|_| random_sphere_point(&mut rng)).collect();
    let hs = pts
        .iter()
        .map(|p| hamiltonian_of_rotation(&beta, r, &Vector3::z(), p))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let num: f64 = pts.iter().zip(&hs).map(|(p, h)| h * p.vector().z).sum();
    let den: f64 = pts.iter().map(|p| p.vector().z.powi(2)).sum();
    let c = num / den;
    let resid = pts.iter().zip(&hs).map(|(p, h)| (h - c * p.vector().z).abs()).fold(0.0, f64::max);
    ensure(resid < C6_FIT_RESIDUAL, || format!("fit residual {resid:e}"))?;
    Ok(format!("max |dH - i_X w| {worst:.1e}; H_z = {c:.12} p_z, residual {resid:.1e}; r = {r:.12}"))
}

fn criterion_7() -> Outcome {
    let mut rng = seeded(SEED + 7);
    let mut min_sv = f64::INFINITY;
    for _ in 0..100 {
        let w: SO3Element<f64> = random_so3(&mut rng);
        let (rank, s) = transitivity_rank(&w);
        ensure(rank == 3, || format!("rank {rank}"))?;
        min_sv = min_sv.min(s);
    }
    ensure(min_sv > C7_MIN_SINGULAR, || format!("smallest singular value {min_sv:e}"))?;
    Ok(format!("rank 3 at 100 frames, smallest singular value {min_sv:.6}"))
}

fn criterion_8() -> Outcome {
    let mut rng = seeded(SEED + 8);
    let bundle = SphereBundle::default();
    let beta = ConnectionForm::<f64>::sphere_invariant(bundle);
    let frames: Vec<SO3Element<f64>> = (0..20).map(|_| random_so3(&mut rng)).collect();
    let r = measure_r(&beta, &frames).map_err(|e| e.to_string())?.r;
    let mm = momentum_map(
        &MomentumAction::Rotations,
        SymplecticPotential::Scaled { connection: beta, scale: -1.0 / r },
    )
    .map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let a: SO3Element<f64> = random_so3(&mut rng);
        let w: SO3Element<f64> = random_so3(&mut rng);
        let mu_w = mm.eval_at(&TotalSpacePoint::sphere(w, SphereLevel::Gamma)).map_err(|e| e.to_string())?;
        let mu_aw = mm
            .eval_at(&TotalSpacePoint::sphere(a.mul(&w), SphereLevel::Gamma))
            .map_err(|e| e.to_string())?;
        // μ(a·w)(v) = μ(w)(aᵀv), i.e. μ(a·w) = a·μ(w)
        let mu_w3 = Vector3::new(mu_w[0], mu_w[1], mu_w[2]);
        let rotated = a.apply(&mu_w3);
        let diff = (Vector3::new(mu_aw[0], mu_aw[1], mu_aw[2]) - rotated).norm();
        worst = worst.max(diff);
    }
    ensure(worst < C8_EQUIVARIANCE_TOL, || format!("equivariance defect {worst:e}"))?;

    let m = [1i64, 2];
    let action = CircleActionSpec::<f64>::linear(m.to_vec()).map_err(|e| e.to_string())?;
    let lin = momentum_map(&MomentumAction::Circle(action), SymplecticPotential::Base(OneForm::liouville(1.0)))
        .map_err(|e| e.to_string())?;
    let (mut num, mut den) = (0.0, 0.0);
    for _ in 0..20 {
        let x: DVector<f64> = gaussian_vector(&mut rng, 4);
        let h = lin.eval(&x).map_err(|e| e.to_string())?[0];
        let basis = m[0] as f64 * (x[0].powi(2) + x[2].powi(2)) + m[1] as f64 * (x[1].powi(2) + x[3].powi(2));
        num += h * basis;
        den += basis * basis;
    }
    let c = num / den;
    let expected = std::f64::consts::PI;
    ensure((c - expected).abs() < C8_SCALE_TOL, || format!("c = {c}, expected {expected}"))?;
    Ok(format!("equivariance defect {worst:.1e}; linear H = {c:.12} * sum m|z|^2"))
}

fn criterion_9() -> Outcome {
    let lin = CircleActionSpec::<f64>::linear(vec![1, 1]).map_err(|e| e.to_string())?;
    let beta = ConnectionForm::trivial(4, OneForm::liouville(1.0)).map_err(|e| e.to_string())?;
    let d1 = check_conservation(&lin, &beta, &dv(&[0.3, -0.8, 0.5, 0.1]), C9_STEPS)
        .map_err(|e| e.to_string())?;
    let rot = CircleActionSpec::sphere(SphereRotation::about(Vector3::<f64>::z()).map_err(|e| e.to_string())?);
    let sbeta = ConnectionForm::sphere_invariant(SphereBundle::gamma_squared(Orientation::RightHanded));
    let z: f64 = 0.4;
    let rho = (1.0 - z * z).sqrt();
    let x0 = dv(&[rho * 0.3f64.cos(), rho * 0.3f64.sin(), z]);
    let d2 = check_conservation(&rot, &sbeta, &x0, C9_STEPS).map_err(|e| e.to_string())?;
    ensure(d1 < C9_DRIFT_TOL && d2 < C9_DRIFT_TOL, || format!("drift {d1:e} (R^4), {d2:e} (S^2)"))?;
    Ok(format!("drift {d1:.1e} on R^4, {d2:.1e} on S^2"))
}

fn criterion_10(indices: &mut Vec<i64>) -> Outcome {
    let r = equal_indices_flat::<f64>(&[1, 0], 20, SEED).map_err(|e| e.to_string())?;
    indices.extend(&r.indices);
    ensure(r.indices.len() == 20 && r.all_equal && r.indices[0] == 2, || {
        format!("indices {:?}", r.indices)
    })?;
    Ok("index 2 at 20 fixed points".into())
}

fn criterion_11() -> Outcome {
    let origin = DVector::zeros(4);
    let mut worst = 0.0f64;
    let mut seen = Vec::new();
    for rows in [vec![vec![1, 0], vec![0, 1]], vec![vec![2, -1], vec![1, 1]]] {
        let t = TorusActionSpec::<f64>::linear(rows).map_err(|e| e.to_string())?;
        for tau in [OneForm::Zero, OneForm::liouville(1.0)] {
            let beta = ConnectionForm::trivial(4, tau).map_err(|e| e.to_string())?;
            let qs = q_vector(&t, &beta, &origin).map_err(|e| e.to_string())?;
            for q in &qs {
                let k = (q.value / 2.0).round() * 2.0;
                worst = worst.max((q.value - k).abs());
            }
            seen.push(qs.iter().map(|q| q.value.round() as i64).collect::<Vec<_>>());
        }
    }
    ensure(worst < C11_EVEN_TOL, || format!("distance to 2Z^2 {worst:e}"))?;
    Ok(format!("q vectors {seen:?}, max distance to 2Z^2 {worst:.1e}"))
}

fn criterion_12(indices: &mut Vec<i64>) -> Outcome {
    let mut rng = seeded(SEED + 12);
    let random_axis: SpherePoint<f64> = random_sphere_point(&mut rng);
    let mut pairs = Vec::new();
    for axis in [Vector3::z(), Vector3::x(), *random_axis.vector()] {
        for speed in [1i64, 2, -1] {
            let rot = SphereRotation::new(axis, speed).map_err(|e| e.to_string())?;
            for sign in [1.0, -1.0] {
                let p = SpherePoint::new(axis * sign).map_err(|e| e.to_string())?;
                let (a, b) = gamma_winding_pair(&rot, &p, Orientation::RightHanded, 256)
                    .map_err(|e| e.to_string())?;
                ensure(b == 2 * a && a == speed * sign as i64, || {
                    format!("axis {axis:?} speed {speed} pole {sign}: ({a}, {b})")
                })?;
                let k = local_index_with(
                    &CircleActionSpec::sphere(rot),
                    &DVector::from_column_slice(p.vector().as_slice()),
                    Orientation::RightHanded,
                )
                .map_err(|e| e.to_string())?;
                indices.push(k);
                pairs.push((a, b));
            }
        }
    }
    Ok(format!("{} pole orbits, all second = 2 x first", pairs.len()))
}

fn main() -> ExitCode {
    let mut indices = Vec::new();
    let results: Vec<(u32, &str, Outcome)> = vec![
        (1, "fixed-point formula", criterion_1(&mut indices)),
        (2, "loop-degree engine", criterion_2()),
        (3, "section independence", criterion_3()),
        (4, "sphere bundle nontriviality", criterion_4()),
        (10, "flat-bundle equality", criterion_10(&mut indices)),
        (12, "gamma to gamma-squared doubling", criterion_12(&mut indices)),
        (5, "sphere pole indices and evenness", criterion_5(&mut indices)),
        (6, "hamiltonian recovery", criterion_6()),
        (7, "transitivity", criterion_7()),
        (8, "momentum map", criterion_8()),
        (9, "conservation", criterion_9()),
        (11, "delzant lattice", criterion_11()),
    ];
    let mut sorted = results;
    sorted.sort_by_key(|r| r.0);
    let mut failed = 0;
    for (n, name, outcome) in &sorted {
        match outcome {
            Ok(detail) => println!("criterion {n:>2} PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n:>2} FAIL  {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", sorted.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
