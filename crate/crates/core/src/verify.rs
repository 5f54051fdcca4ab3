//! The invariant suite run by `maslov verify`.
//!
//! Every check is seeded from [`SuiteConfig::seed`], so two runs with the same
//! configuration produce identical outcomes. A [`Mutation`] replaces `det²`
//! in the index checks; a healthy suite must then fail.

use nalgebra::{DMatrix, DVector, Vector3};

use crate::actions::{
    check_conservation, equal_indices_flat, local_index_with, momentum_map, q_beta, q_vector,
    CircleActionSpec, MomentumAction, SymplecticPotential, TorusActionSpec,
};
use crate::bundle::{characteristic_number, curvature, ConnectionForm, TotalSpacePoint};
use crate::error::Result;
use crate::forms::OneForm;
use crate::grassmann::{
    det_squared, loop_degree, maslov_index, unitary_of_frame, LagrangianFrame, Phase, SampledLoop,
    UnitaryFrame,
};
use crate::random::{
    gaussian_vector, random_exact_form, random_orthogonal, random_so3, random_spd, random_unitary,
    seeded, SeededRng,
};
use crate::sphere::{
    clutching_degree, gamma_winding_pair, isotropy_phase, measure_r, transitivity_rank,
    Orientation, SO3Element, SphereBundle, SphereLevel, SpherePoint, SphereRotation,
};
use crate::symplin::{
    average_metric, build_compatible_j, linear_action_matrix, standard_symplectic,
    CompatibleTriple, GroupSampler,
};

pub const DEFAULT_SEED: u64 = 0x6d61_736c_6f76;

/// A deliberate defect in the Maslov–Arnold map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mutation {
    /// `conj(det U)²`: flips the sign of every index.
    ConjugateDetSquared,
    /// `det U`: halves every index and is no longer `O(n)`-invariant.
    DropSquare,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteConfig {
    pub seed: u64,
    pub orientation: Orientation,
    pub mutation: Option<Mutation>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self { seed: DEFAULT_SEED, orientation: Orientation::RightHanded, mutation: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn fiber_phase(u: &UnitaryFrame<f64>, mutation: Option<Mutation>) -> Phase<f64> {
    match mutation {
        None => det_squared(u),
        Some(Mutation::ConjugateDetSquared) => det_squared(u).conj(),
        Some(Mutation::DropSquare) => {
            Phase::normalized(u.matrix().clone().determinant()).unwrap_or_else(|_| Phase::one())
        }
    }
}

/// Index of the plane loop `T(t)·ℝⁿ` through the (possibly mutated) fiber map.
fn orbit_index(weights: &[i64], mutation: Option<Mutation>) -> Result<i64> {
    let n = weights.len();
    let triple = CompatibleTriple::<f64>::standard(n)?;
    let start = LagrangianFrame::horizontal(n)?;
    let top = weights.iter().map(|m| m.unsigned_abs() as usize).max().unwrap_or(0);
    let phases = SampledLoop::try_uniform::<f64>(64 * (top + 1), |t| {
        let f = start.transformed(&linear_action_matrix(weights, t), triple.omega())?;
        Ok(fiber_phase(&unitary_of_frame(&f, &triple)?, mutation))
    })?;
    Ok(loop_degree(&phases)?.degree)
}

const WEIGHT_CASES: [&[i64]; 6] = [&[1], &[1, 1], &[2, -1], &[3, 0, -1], &[-1], &[1, 2, 0]];

type Check = fn(&SuiteConfig, &mut SeededRng) -> Result<(bool, String)>;

fn compatible_triples(_: &SuiteConfig, rng: &mut SeededRng) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    let mut min_eig = f64::INFINITY;
    for n in 1..=3 {
        for _ in 0..10 {
            let t = build_compatible_j(&standard_symplectic(n)?, &random_spd(rng, 2 * n))?;
            let (j2, pres, asym, min) = t.invariant_defects();
            worst = worst.max(j2).max(pres).max(asym);
            min_eig = min_eig.min(min);
        }
    }
    Ok((worst < 1e-10 && min_eig > 0.0, format!("max defect {worst:.2e}, min g_J eigenvalue {min_eig:.3e}")))
}

fn averaged_structure(_: &SuiteConfig, rng: &mut SeededRng) -> Result<(bool, String)> {
    let sampler = GroupSampler::<f64>::circle(&[1, 2], 64)?;
    let gbar = average_metric(&random_spd(rng, 4), &sampler)?;
    let triple = build_compatible_j(&standard_symplectic(2)?, &gbar)?;
    let gj = triple.metric_j();
    let mut worst = 0.0f64;
    for h in sampler.samples() {
        worst = worst.max((h * triple.j() - triple.j() * h).norm());
        worst = worst.max((h.transpose() * &gj * h - &gj).norm());
    }
    let idem = (average_metric(&gbar, &sampler)?.matrix() - gbar.matrix()).norm();
    Ok((worst < 1e-9 && idem < 1e-10, format!("commutator {worst:.2e}, idempotence {idem:.2e}")))
}

fn orthogonal_invariance(c: &SuiteConfig, rng: &mut SeededRng) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let u = random_unitary::<f64, _>(rng, 3);
        let o: DMatrix<f64> = random_orthogonal(rng, 3);
        let moved = u.times_real(&o)?;
        worst = worst.max(fiber_phase(&moved, c.mutation).distance(&fiber_phase(&u, c.mutation)));
    }
    Ok((worst < 1e-12, format!("max phase change {worst:.2e}")))
}

fn winding_recovery(_: &SuiteConfig, _: &mut SeededRng) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    let mut exact = true;
    for k in -3i64..=3 {
        let d = loop_degree(&SampledLoop::uniform(64, |t| Phase::<f64>::from_turns(k as f64 * t))?)?;
        exact &= d.degree == k;
        worst = worst.max(d.residual);
    }
    Ok((exact && worst < 1e-10, format!("residual {worst:.2e}")))
}

fn section_independence(_: &SuiteConfig, rng: &mut SeededRng) -> Result<(bool, String)> {
    let triple = CompatibleTriple::<f64>::standard(1)?;
    let line = LagrangianFrame::horizontal(1)?;
    let x0 = DVector::from_column_slice(&[0.7, 0.2]);
    let base = SampledLoop::uniform(64, |t| linear_action_matrix(&[1], t) * &x0)?;
    let frames = SampledLoop::try_uniform(64, |t| line.transformed(&linear_action_matrix(&[1], t), triple.omega()))?;
    let mut found = Vec::new();
    for _ in 0..5 {
        found.push(maslov_index(&frames, Some(&base), &triple, &random_exact_form(rng, 2, 3, 4))?.degree);
    }
    Ok((found.iter().all(|&k| k == 2), format!("indices {found:?}")))
}

fn fixed_point_law(c: &SuiteConfig, _: &mut SeededRng) -> Result<(bool, String)> {
    let mut bad = Vec::new();
    for m in WEIGHT_CASES {
        let k = orbit_index(m, c.mutation)?;
        if k != 2 * m.iter().sum::<i64>() {
            bad.push(format!("{m:?} -> {k}"));
        }
    }
    Ok((bad.is_empty(), if bad.is_empty() { "k = 2 sum m for every case".into() } else { bad.join(", ") }))
}

fn evenness(c: &SuiteConfig, _: &mut SeededRng) -> Result<(bool, String)> {
    let mut indices = Vec::new();
    for m in WEIGHT_CASES {
        indices.push(orbit_index(m, c.mutation)?);
    }
    let odd: Vec<i64> = indices.iter().copied().filter(|k| k % 2 != 0).collect();
    Ok((odd.is_empty(), format!("indices {indices:?}")))
}

fn connection_independence(_: &SuiteConfig, rng: &mut SeededRng) -> Result<(bool, String)> {
    let action = CircleActionSpec::<f64>::linear(vec![2, -1])?;
    let origin = DVector::zeros(4);
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let tau = random_exact_form(rng, 4, 3, 4).plus(OneForm::liouville(1.0));
        let q = q_beta(&action, &ConnectionForm::trivial(4, tau)?, &origin)?;
        worst = worst.max((q.value - 2.0).abs());
    }
    Ok((worst < 1e-6, format!("max deviation {worst:.2e}")))
}

fn flat_equality(c: &SuiteConfig, _: &mut SeededRng) -> Result<(bool, String)> {
    let r = equal_indices_flat::<f64>(&[1, 0], 20, c.seed)?;
    let ok = r.all_equal && r.indices.len() == 20 && r.indices[0] == 2;
    Ok((ok, format!("{} fixed points, indices {:?}", r.indices.len(), r.indices.first())))
}

fn torus_lattice(_: &SuiteConfig, _: &mut SeededRng) -> Result<(bool, String)> {
    let t = TorusActionSpec::<f64>::linear(vec![vec![2, -1], vec![1, 1]])?;
    let qs = q_vector(&t, &ConnectionForm::trivial(4, OneForm::liouville(1.0))?, &DVector::zeros(4))?;
    let worst = qs.iter().map(|q| (q.value - 2.0 * (q.value / 2.0).round()).abs()).fold(0.0, f64::max);
    Ok((worst < 1e-6, format!("distance to 2Z^2 {worst:.2e}")))
}

fn flatness(_: &SuiteConfig, rng: &mut SeededRng) -> Result<(bool, String)> {
    let beta = ConnectionForm::trivial(4, random_exact_form(rng, 4, 3, 5))?;
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let x: DVector<f64> = gaussian_vector(rng, 4);
        let (u, v): (DVector<f64>, DVector<f64>) = (gaussian_vector(rng, 4), gaussian_vector(rng, 4));
        worst = worst.max(curvature(&beta, &x, &u, &v)?.abs());
    }
    Ok((worst < 1e-8, format!("max curvature {worst:.2e}")))
}

fn sphere_nontrivial(c: &SuiteConfig, _: &mut SeededRng) -> Result<(bool, String)> {
    let bundle = SphereBundle::gamma(c.orientation);
    let chi = characteristic_number(&ConnectionForm::<f64>::sphere_invariant(bundle))?;
    let deg = clutching_degree::<f64>(&bundle, 256)?;
    let ok = (chi.value.abs() - 2.0).abs() < 1e-3 && chi.nearest == -deg;
    Ok((ok, format!("integral {:.9}, clutching degree {deg}", chi.value)))
}

fn sphere_poles(c: &SuiteConfig, _: &mut SeededRng) -> Result<(bool, String)> {
    let action = CircleActionSpec::sphere(SphereRotation::<f64>::about(Vector3::z())?);
    let beta = ConnectionForm::sphere_invariant(SphereBundle::gamma_squared(c.orientation));
    let s = c.orientation.sign();
    let north = q_beta(&action, &beta, &DVector::from_column_slice(&[0.0, 0.0, 1.0]))?;
    let south = q_beta(&action, &beta, &DVector::from_column_slice(&[0.0, 0.0, -1.0]))?;
    let kn = local_index_with(&action, &north.point, c.orientation)?;
    let ks = local_index_with(&action, &south.point, c.orientation)?;
    let ok = (north.value - 2.0 * s as f64).abs() < 1e-6
        && (south.value + 2.0 * s as f64).abs() < 1e-6
        && (kn, ks) == (2 * s, -2 * s);
    Ok((ok, format!("k_N = {kn}, k_S = {ks}")))
}

fn doubling(c: &SuiteConfig, rng: &mut SeededRng) -> Result<(bool, String)> {
    let mut ok = true;
    let mut count = 0;
    for _ in 0..4 {
        let axis = crate::random::random_sphere_point::<f64, _>(rng);
        for speed in [1, -2] {
            let rot = SphereRotation::new(*axis.vector(), speed)?;
            for p in [axis.vector() * 1.0, axis.vector() * -1.0] {
                let (a, b) = gamma_winding_pair(&rot, &SpherePoint::new(p)?, c.orientation, 256)?;
                ok &= b == 2 * a;
                count += 1;
            }
        }
    }
    Ok((ok, format!("{count} pole orbits")))
}

fn transitivity(_: &SuiteConfig, rng: &mut SeededRng) -> Result<(bool, String)> {
    let mut min_sv = f64::INFINITY;
    let mut all_three = true;
    for _ in 0..100 {
        let (rank, s) = transitivity_rank::<f64>(&random_so3(rng));
        all_three &= rank == 3;
        min_sv = min_sv.min(s);
    }
    Ok((all_three && min_sv > 1e-6, format!("smallest singular value {min_sv:.4}")))
}

fn isotropy(c: &SuiteConfig, rng: &mut SeededRng) -> Result<(bool, String)> {
    let bundle = SphereBundle::gamma(c.orientation);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let p = crate::random::random_sphere_point::<f64, _>(rng);
        let a1 = crate::random::uniform::<f64, _>(rng, -3.0, 3.0);
        let a2 = crate::random::uniform::<f64, _>(rng, -3.0, 3.0);
        let (h1, h2) = (SO3Element::about(p.vector(), a1), SO3Element::about(p.vector(), a2));
        let lhs = isotropy_phase(&bundle, &p, &h1.mul(&h2))?;
        let rhs = isotropy_phase(&bundle, &p, &h1)?.mul(&isotropy_phase(&bundle, &p, &h2)?);
        worst = worst.max(lhs.distance(&rhs));
    }
    Ok((worst < 1e-9, format!("homomorphism defect {worst:.2e}")))
}

fn momentum(c: &SuiteConfig, rng: &mut SeededRng) -> Result<(bool, String)> {
    let beta = ConnectionForm::<f64>::sphere_invariant(SphereBundle::gamma(c.orientation));
    let frames: Vec<SO3Element<f64>> = (0..20).map(|_| random_so3(rng)).collect();
    let r = measure_r(&beta, &frames)?.r;
    let mm = momentum_map(&MomentumAction::Rotations, SymplecticPotential::Scaled { connection: beta, scale: -1.0 / r })?;
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let (a, w): (SO3Element<f64>, SO3Element<f64>) = (random_so3(rng), random_so3(rng));
        let mu = mm.eval_at(&TotalSpacePoint::sphere(w, SphereLevel::Gamma))?;
        let moved = mm.eval_at(&TotalSpacePoint::sphere(a.mul(&w), SphereLevel::Gamma))?;
        let expected = a.apply(&Vector3::new(mu[0], mu[1], mu[2]));
        worst = worst.max((Vector3::new(moved[0], moved[1], moved[2]) - expected).norm());
    }
    Ok((worst < 1e-9, format!("equivariance defect {worst:.2e}, r = {r:.12}")))
}

fn conservation(c: &SuiteConfig, _: &mut SeededRng) -> Result<(bool, String)> {
    let lin = CircleActionSpec::<f64>::linear(vec![1, 1])?;
    let d1 = check_conservation(
        &lin,
        &ConnectionForm::trivial(4, OneForm::liouville(1.0))?,
        &DVector::from_column_slice(&[0.3, -0.8, 0.5, 0.1]),
        512,
    )?;
    let rot = CircleActionSpec::sphere(SphereRotation::<f64>::about(Vector3::z())?);
    let x0 = DVector::from_column_slice(&[(1.0f64 - 0.16).sqrt(), 0.0, 0.4]);
    let beta = ConnectionForm::sphere_invariant(SphereBundle::gamma_squared(c.orientation));
    let d2 = check_conservation(&rot, &beta, &x0, 512)?;
    Ok((d1 < 1e-8 && d2 < 1e-8, format!("drift {d1:.2e} (R^4), {d2:.2e} (S^2)")))
}

const CHECKS: [(&str, Check); 18] = [
    ("symplin.compatible_triples", compatible_triples),
    ("symplin.averaged_structure", averaged_structure),
    ("grassmann.orthogonal_invariance", orthogonal_invariance),
    ("grassmann.winding_recovery", winding_recovery),
    ("grassmann.section_independence", section_independence),
    ("actions.fixed_point_law", fixed_point_law),
    ("actions.evenness", evenness),
    ("actions.connection_independence", connection_independence),
    ("actions.flat_equality", flat_equality),
    ("actions.torus_lattice", torus_lattice),
    ("actions.conservation", conservation),
    ("bundle.flatness", flatness),
    ("bundle.sphere_nontrivial", sphere_nontrivial),
    ("sphere.pole_indices", sphere_poles),
    ("sphere.doubling", doubling),
    ("sphere.transitivity", transitivity),
    ("sphere.isotropy_homomorphism", isotropy),
    ("sphere.momentum_equivariance", momentum),
];

/// Runs every check; each gets its own stream derived from the seed.
pub fn run_suite(config: &SuiteConfig) -> Vec<CheckOutcome> {
    CHECKS
        .iter()
        .enumerate()
        .map(|(k, (name, check))| {
            let mut rng = seeded(config.seed.wrapping_add(k as u64));
            match check(config, &mut rng) {
                Ok((passed, detail)) => CheckOutcome { name, passed, detail },
                Err(e) => CheckOutcome { name, passed: false, detail: format!("error: {e}") },
            }
        })
        .collect()
}
