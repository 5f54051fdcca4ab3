//! Circle and torus actions on ℝ²ⁿ and S², their lifts to the Maslov
//! bundles, Maslov data of lifted orbits, local indices and momentum maps.
//!
//! Linear actions are `zⱼ ↦ e^{2πi mⱼ t} zⱼ` with `zⱼ = qⱼ + i pⱼ`. Over
//! ℝ²ⁿ the bundle `Γ²` is `ℝ²ⁿ × S¹` through the constant standard frame,
//! so the lifted flow multiplies the fiber by `det²` of the tangent map read
//! as a complex matrix. On S² the lift is left multiplication of frames.

use nalgebra::{Complex, DMatrix, DVector, Vector3};

use crate::bundle::{
    connection_eval, curvature, maslov_data, BundleKind, ConnectionForm, TangentVector,
    TotalSpacePoint,
};
use crate::error::{MaslovError, Result};
use crate::forms::{OneForm, FD_STEP};
use crate::grassmann::{det_squared, loop_degree, unitarity_defect, Phase, SampledLoop, UnitaryFrame};
use crate::random::{gaussian_vector, random_sphere_point, random_tangent, seeded};
use crate::scalar::Real;
use crate::sphere::{
    frame_over, gamma_winding_pair, generator_body, omega_s2, Orientation, SphereLevel, SpherePoint,
    SphereRotation,
};
use crate::symplin::{linear_action_matrix, standard_symplectic, MAX_HALF_DIM};

/// Default number of orbit intervals for Maslov data of lifted orbits.
pub const ORBIT_SAMPLES: usize = 512;
/// Orbit sampling is doubled on guard failures up to this count.
pub const MAX_ORBIT_SAMPLES: usize = 8192;
/// Times at which fixed points are tested.
pub const FIXED_POINT_TIMES: [f64; 3] = [0.25, 0.5, 0.618_033_988_749_894_9];
pub const FIXED_POINT_TOL: f64 = 1e-10;
/// Fixed-point values of `Q_β` must lie this close to an even integer.
pub const EVEN_TOL: f64 = 1e-6;
/// Time step at which linearized eigenphases are read.
pub const RESONANCE_TIME: f64 = 1e-3;
/// Seed of the internal sampling used for structural checks.
const CHECK_SEED: u64 = 0x5eed_0001;

/// A period-1 circle action.
#[derive(Debug, Clone, PartialEq)]
pub enum CircleActionSpec<T: Real> {
    Linear { weights: Vec<i64> },
    Sphere(SphereRotation<T>),
}

impl<T: Real> CircleActionSpec<T> {
    pub fn linear(weights: Vec<i64>) -> Result<Self> {
        if weights.is_empty() || weights.len() > MAX_HALF_DIM {
            return Err(MaslovError::InvalidDimension(format!(
                "need 1..={MAX_HALF_DIM} weights, got {}",
                weights.len()
            )));
        }
        Ok(CircleActionSpec::Linear { weights })
    }

    pub fn sphere(rotation: SphereRotation<T>) -> Self {
        CircleActionSpec::Sphere(rotation)
    }

    /// Dimension of the ambient coordinates of base points.
    pub fn dim(&self) -> usize {
        match self {
            CircleActionSpec::Linear { weights } => 2 * weights.len(),
            CircleActionSpec::Sphere(_) => 3,
        }
    }

    fn check_point(&self, x: &DVector<T>) -> Result<()> {
        if x.len() != self.dim() {
            return Err(MaslovError::InvalidDimension(format!(
                "point has {} coordinates, action acts on {}",
                x.len(),
                self.dim()
            )));
        }
        if let CircleActionSpec::Sphere(_) = self {
            SpherePoint::new(Vector3::from_column_slice(x.as_slice()))?;
        }
        Ok(())
    }

    /// The ambient matrix of the time-`t` map.
    pub fn matrix_at(&self, t: T) -> DMatrix<T> {
        match self {
            CircleActionSpec::Linear { weights } => linear_action_matrix(weights, t),
            CircleActionSpec::Sphere(r) => {
                DMatrix::from_column_slice(3, 3, r.at(t).matrix().as_slice())
            }
        }
    }
}

/// Commuting circle actions on one space.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusActionSpec<T: Real> {
    components: Vec<CircleActionSpec<T>>,
}

impl<T: Real> TorusActionSpec<T> {
    /// Checks commutation of the flows at sampled points to `1e-9`.
    pub fn new(components: Vec<CircleActionSpec<T>>) -> Result<Self> {
        let dim = match components.first() {
            Some(c) => c.dim(),
            None => return Err(MaslovError::InvalidInput("torus has no components".into())),
        };
        if components.iter().any(|c| c.dim() != dim) {
            return Err(MaslovError::InvalidDimension("torus components act on different spaces".into()));
        }
        let mut rng = seeded(CHECK_SEED);
        let mut worst = T::zero();
        for _ in 0..5 {
            let x = match components[0] {
                CircleActionSpec::Linear { .. } => gaussian_vector(&mut rng, dim),
                CircleActionSpec::Sphere(_) => {
                    let p: SpherePoint<T> = random_sphere_point(&mut rng);
                    DVector::from_column_slice(p.vector().as_slice())
                }
            };
            for a in &components {
                for b in &components {
                    let (s, t) = (T::lit(0.3), T::lit(0.7));
                    let ab = flow(a, s, &flow(b, t, &x)?)?;
                    let ba = flow(b, t, &flow(a, s, &x)?)?;
                    worst = worst.max((ab - ba).norm() / x.norm().max(T::one()));
                }
            }
        }
        if worst > T::tol(1e-9) {
            return Err(MaslovError::NotCommuting { defect: worst.as_f64() });
        }
        Ok(Self { components })
    }

    /// Linear torus from weight rows.
    pub fn linear(rows: Vec<Vec<i64>>) -> Result<Self> {
        Self::new(rows.into_iter().map(CircleActionSpec::linear).collect::<Result<_>>()?)
    }

    pub fn components(&self) -> &[CircleActionSpec<T>] {
        &self.components
    }
}

/// The time-`t` map applied to `x`.
pub fn flow<T: Real>(action: &CircleActionSpec<T>, t: T, x: &DVector<T>) -> Result<DVector<T>> {
    action.check_point(x)?;
    Ok(action.matrix_at(t) * x)
}

/// `d/dt flow(t, x)` at `t = 0`.
pub fn generator<T: Real>(action: &CircleActionSpec<T>, x: &DVector<T>) -> Result<DVector<T>> {
    action.check_point(x)?;
    Ok(match action {
        CircleActionSpec::Linear { weights } => {
            let n = weights.len();
            DVector::from_fn(2 * n, |i, _| {
                let j = i % n;
                let w = T::two_pi() * T::from_int(weights[j]);
                if i < n {
                    -w * x[n + j]
                } else {
                    w * x[j]
                }
            })
        }
        CircleActionSpec::Sphere(r) => {
            let g = r.generator().cross(&Vector3::from_column_slice(x.as_slice()));
            DVector::from_column_slice(g.as_slice())
        }
    })
}

/// A real `2n×2n` matrix read as a complex `n×n` matrix through `zⱼ = qⱼ + i pⱼ`.
/// Only the complex-linear part is kept.
pub fn complex_matrix<T: Real>(a: &DMatrix<T>) -> DMatrix<Complex<T>> {
    let n = a.nrows() / 2;
    DMatrix::from_fn(n, n, |k, j| Complex::new(a[(k, j)], a[(n + k, j)]))
}

/// Asserts that a linear tangent map is unitary and returns its `det²`.
fn unitary_det_squared<T: Real>(a: &DMatrix<T>) -> Result<Phase<T>> {
    let u = complex_matrix(a);
    let defect = unitarity_defect(&u);
    if defect > T::tol(1e-10) {
        return Err(MaslovError::Internal(format!(
            "tangent map is not unitary (defect {:e})",
            defect.as_f64()
        )));
    }
    Ok(det_squared(&UnitaryFrame::new(u)?))
}

/// The point over `p` used to start lifted orbits: fiber phase `1` over
/// ℝ²ⁿ, or the reference frame over `p` on S².
pub fn fiber_point_over<T: Real>(beta: &ConnectionForm<T>, p: &DVector<T>) -> Result<TotalSpacePoint<T>> {
    match beta.kind() {
        BundleKind::Trivial { dim } if p.len() == dim => {
            Ok(TotalSpacePoint::trivial(p.clone(), Phase::one()))
        }
        BundleKind::Sphere(b) if p.len() == 3 => {
            let sp = SpherePoint::new(Vector3::from_column_slice(p.as_slice()))?;
            Ok(TotalSpacePoint::sphere(frame_over(&sp), b.level))
        }
        _ => Err(MaslovError::WrongBundle),
    }
}

/// The lifted flow on `Γ²`.
pub fn lifted_flow_gamma2<T: Real>(
    action: &CircleActionSpec<T>,
    t: T,
    w: &TotalSpacePoint<T>,
) -> Result<TotalSpacePoint<T>> {
    match (action, w) {
        (CircleActionSpec::Linear { .. }, TotalSpacePoint::Trivial { base, fiber }) => {
            action.check_point(base)?;
            let a = action.matrix_at(t);
            let phase = unitary_det_squared(&a)?;
            Ok(TotalSpacePoint::trivial(&a * base, fiber.mul(&phase)))
        }
        (CircleActionSpec::Sphere(r), TotalSpacePoint::Sphere { frame, level }) => {
            Ok(TotalSpacePoint::sphere(r.at(t).mul(frame), *level))
        }
        _ => Err(MaslovError::WrongBundle),
    }
}

/// The generator of the lifted flow at `w`.
pub fn lifted_generator<T: Real>(
    action: &CircleActionSpec<T>,
    w: &TotalSpacePoint<T>,
) -> Result<TangentVector<T>> {
    match (action, w) {
        (CircleActionSpec::Linear { weights }, TotalSpacePoint::Trivial { base, .. }) => {
            let g = complex_matrix(&generator_matrix(weights));
            // d/dt arg det²(e^{tK}) = 2 Im tr K, measured in turns
            let tr = (0..g.nrows()).fold(T::zero(), |a, i| a + g[(i, i)].im);
            Ok(TangentVector::Trivial { base: generator(action, base)?, fiber: tr / T::pi() })
        }
        (CircleActionSpec::Sphere(r), TotalSpacePoint::Sphere { frame, .. }) => {
            Ok(TangentVector::Sphere(generator_body(frame, &r.generator())))
        }
        _ => Err(MaslovError::WrongBundle),
    }
}

fn generator_matrix<T: Real>(weights: &[i64]) -> DMatrix<T> {
    let n = weights.len();
    let mut g = DMatrix::zeros(2 * n, 2 * n);
    for (j, &m) in weights.iter().enumerate() {
        let w = T::two_pi() * T::from_int(m);
        g[(j, n + j)] = -w;
        g[(n + j, j)] = w;
    }
    g
}

/// `max ‖flow(t, p) − p‖` over the fixed-point test times, relative to `max(1, ‖p‖)`.
pub fn fixed_point_defect<T: Real>(action: &CircleActionSpec<T>, p: &DVector<T>) -> Result<T> {
    let scale = p.norm().max(T::one());
    FIXED_POINT_TIMES.iter().try_fold(T::zero(), |acc, &t| {
        Ok(acc.max((flow(action, T::lit(t), p)? - p).norm() / scale))
    })
}

pub fn is_fixed_point<T: Real>(action: &CircleActionSpec<T>, p: &DVector<T>) -> Result<bool> {
    Ok(fixed_point_defect(action, p)? <= T::lit(FIXED_POINT_TOL))
}

fn require_fixed<T: Real>(action: &CircleActionSpec<T>, p: &DVector<T>) -> Result<()> {
    let d = fixed_point_defect(action, p)?;
    if d > T::lit(FIXED_POINT_TOL) {
        return Err(MaslovError::NotFixedPoint { defect: d.as_f64() });
    }
    Ok(())
}

/// `Q_β` at a base point.
#[derive(Debug, Clone, PartialEq)]
pub struct QResult<T: Real> {
    pub point: DVector<T>,
    pub value: T,
    pub is_fixed: bool,
    /// Present exactly when `is_fixed`; even on `Γ²`.
    pub nearest_integer: Option<i64>,
    pub samples: usize,
}

/// Maslov data of the lifted orbit through `w0`, doubling the sampling on
/// guard failures.
pub fn orbit_maslov_data<T: Real>(
    action: &CircleActionSpec<T>,
    beta: &ConnectionForm<T>,
    w0: &TotalSpacePoint<T>,
) -> Result<(T, usize)> {
    let mut n = ORBIT_SAMPLES;
    loop {
        let orbit = SampledLoop::try_uniform::<T>(n, |t| lifted_flow_gamma2(action, T::lit(t), w0))?;
        let tangents = orbit
            .values()
            .iter()
            .map(|w| lifted_generator(action, w))
            .collect::<Result<Vec<_>>>()?;
        match maslov_data(&orbit, beta, Some(&tangents)) {
            Ok(d) => return Ok((d.value, n)),
            Err(MaslovError::UndersampledLoop { .. }) if n < MAX_ORBIT_SAMPLES => n *= 2,
            Err(e) => return Err(e),
        }
    }
}

/// `Q_β(p)`: Maslov data of the lifted orbit through the reference point over `p`.
pub fn q_beta<T: Real>(
    action: &CircleActionSpec<T>,
    beta: &ConnectionForm<T>,
    p: &DVector<T>,
) -> Result<QResult<T>> {
    action.check_point(p)?;
    let w0 = fiber_point_over(beta, p)?;
    q_beta_from(action, beta, &w0)
}

/// `Q_β` computed from a chosen point `w0` of the fiber.
pub fn q_beta_from<T: Real>(
    action: &CircleActionSpec<T>,
    beta: &ConnectionForm<T>,
    w0: &TotalSpacePoint<T>,
) -> Result<QResult<T>> {
    let p = w0.base();
    let (value, samples) = orbit_maslov_data(action, beta, w0)?;
    let is_fixed = is_fixed_point(action, &p)?;
    // fixed-point values are integers, and even on Γ² (the trivial bundle over ℝ²ⁿ is Γ²)
    let must_be_even = beta.sphere_bundle().is_none_or(|b| b.level == SphereLevel::GammaSquared);
    let nearest_integer = if is_fixed {
        let k = value.as_f64().round();
        if (value.as_f64() - k).abs() >= EVEN_TOL || (must_be_even && (k as i64) % 2 != 0) {
            return Err(MaslovError::Internal(format!(
                "Q at a fixed point is {} rather than an {} integer",
                value.as_f64(),
                if must_be_even { "even" } else { "exact" }
            )));
        }
        Some(k as i64)
    } else {
        None
    };
    Ok(QResult { point: p, value, is_fixed, nearest_integer, samples })
}

/// Local Maslov index with the default orientation.
pub fn local_index<T: Real>(action: &CircleActionSpec<T>, p: &DVector<T>) -> Result<i64> {
    local_index_with(action, p, Orientation::default())
}

/// Winding of the lifted orbit along the `Γ²` fiber over a fixed point.
pub fn local_index_with<T: Real>(
    action: &CircleActionSpec<T>,
    p: &DVector<T>,
    orientation: Orientation,
) -> Result<i64> {
    action.check_point(p)?;
    require_fixed(action, p)?;
    let k = match action {
        CircleActionSpec::Linear { .. } => {
            let mut n = ORBIT_SAMPLES;
            loop {
                let l = SampledLoop::try_uniform::<T>(n, |t| {
                    unitary_det_squared(&action.matrix_at(T::lit(t)))
                })?;
                match loop_degree(&l) {
                    Ok(d) => break d.degree,
                    Err(MaslovError::UndersampledLoop { .. }) if n < MAX_ORBIT_SAMPLES => n *= 2,
                    Err(e) => return Err(e),
                }
            }
        }
        CircleActionSpec::Sphere(r) => {
            let sp = SpherePoint::new(Vector3::from_column_slice(p.as_slice()))?;
            let mut n = ORBIT_SAMPLES;
            loop {
                match gamma_winding_pair(r, &sp, orientation, n) {
                    Ok((_, k2)) => break k2,
                    Err(MaslovError::UndersampledLoop { .. }) if n < MAX_ORBIT_SAMPLES => n *= 2,
                    Err(e) => return Err(e),
                }
            }
        }
    };
    if k % 2 != 0 {
        return Err(MaslovError::Internal(format!("local index {k} is odd")));
    }
    Ok(k)
}

/// Resonance type with the default orientation.
pub fn resonance_type<T: Real>(action: &CircleActionSpec<T>, p: &DVector<T>) -> Result<Vec<i64>> {
    resonance_type_with(action, p, Orientation::default())
}

/// Weights of the linearized action at a fixed point, read off the
/// eigenphases of the tangent map at a small time.
pub fn resonance_type_with<T: Real>(
    action: &CircleActionSpec<T>,
    p: &DVector<T>,
    orientation: Orientation,
) -> Result<Vec<i64>> {
    action.check_point(p)?;
    require_fixed(action, p)?;
    let t = T::lit(RESONANCE_TIME);
    let to_weight = |angle: T| -> Result<i64> {
        let m = (angle / (T::two_pi() * t)).as_f64();
        let k = m.round();
        if (m - k).abs() > 1e-6 {
            return Err(MaslovError::NotPeriodic(format!("eigenphase rate {m} is not an integer")));
        }
        Ok(k as i64)
    };
    match action {
        CircleActionSpec::Linear { .. } => {
            let u = complex_matrix(&action.matrix_at(t));
            let i2 = Complex::new(T::zero(), T::lit(2.0));
            let herm = (&u - u.adjoint()).map(|z| z / i2);
            let herm = (&herm + herm.adjoint()).map(|z| z * T::lit(0.5));
            let eig = herm.symmetric_eigen();
            let n = u.nrows();
            let mut out = vec![0i64; n];
            let mut taken = vec![false; n];
            for k in 0..n {
                let col = eig.eigenvectors.column(k);
                let slot = (0..n)
                    .filter(|i| !taken[*i])
                    .max_by(|a, b| {
                        col[*a].norm_sqr().partial_cmp(&col[*b].norm_sqr()).unwrap()
                    })
                    .expect("a free slot remains");
                taken[slot] = true;
                let lambda = eig.eigenvalues[k].max(-T::one()).min(T::one());
                out[slot] = to_weight(lambda.asin())?;
            }
            Ok(out)
        }
        CircleActionSpec::Sphere(r) => {
            let sp = SpherePoint::new(Vector3::from_column_slice(p.as_slice()))?;
            let w = frame_over(&sp);
            let m = w.inverse().mul(&r.at(t)).mul(&w);
            let angle = m.matrix()[(1, 0)].atan2(m.matrix()[(0, 0)]);
            Ok(vec![to_weight(angle * T::from_int(orientation.sign()))?])
        }
    }
}

/// `Q_β` for each circle factor of a torus.
pub fn q_vector<T: Real>(
    taction: &TorusActionSpec<T>,
    beta: &ConnectionForm<T>,
    p: &DVector<T>,
) -> Result<Vec<QResult<T>>> {
    taction.components.iter().map(|c| q_beta(c, beta, p)).collect()
}

/// A 1-form `η` with `dη = −π*ω`.
#[derive(Debug, Clone, PartialEq)]
pub enum SymplecticPotential<T: Real> {
    /// Pull-back of a base 1-form on ℝ²ⁿ.
    Base(OneForm<T>),
    /// `scale · f` for a connection `f`.
    Scaled { connection: ConnectionForm<T>, scale: T },
}

/// The group whose momentum map is requested.
#[derive(Debug, Clone, PartialEq)]
pub enum MomentumAction<T: Real> {
    Circle(CircleActionSpec<T>),
    Torus(TorusActionSpec<T>),
    /// SO(3) acting on S², with generators `e_x, e_y, e_z`.
    Rotations,
}

/// An infinitesimal generator: a linear circle action's, or `v ∈ 𝔰𝔬(3)`.
#[derive(Debug, Clone, PartialEq)]
enum Generator<T: Real> {
    Linear(CircleActionSpec<T>),
    Rotation(Vector3<T>),
}

impl<T: Real> Generator<T> {
    fn of(c: &CircleActionSpec<T>) -> Self {
        match c {
            CircleActionSpec::Linear { .. } => Generator::Linear(c.clone()),
            CircleActionSpec::Sphere(r) => Generator::Rotation(r.generator()),
        }
    }

    fn base_field(&self, x: &DVector<T>) -> Result<DVector<T>> {
        match self {
            Generator::Linear(c) => generator(c, x),
            Generator::Rotation(v) => {
                let g = v.cross(&Vector3::from_column_slice(x.as_slice()));
                Ok(DVector::from_column_slice(g.as_slice()))
            }
        }
    }

    fn lifted(&self, w: &TotalSpacePoint<T>) -> Result<TangentVector<T>> {
        match (self, w) {
            (Generator::Linear(c), _) => lifted_generator(c, w),
            (Generator::Rotation(v), TotalSpacePoint::Sphere { frame, .. }) => {
                Ok(TangentVector::Sphere(generator_body(frame, v)))
            }
            _ => Err(MaslovError::WrongBundle),
        }
    }
}

/// `p ↦ μ_p` with `μ_p(v) = η(𝒳_v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumMap<T: Real> {
    generators: Vec<Generator<T>>,
    potential: SymplecticPotential<T>,
    dim: usize,
    /// Largest `|dη + ω|` seen while validating the potential.
    pub potential_defect: T,
}

fn unit<T: Real>(dim: usize, i: usize) -> DVector<T> {
    DVector::from_fn(dim, |k, _| if k == i { T::one() } else { T::zero() })
}

/// Largest `|dη(u, v) + ω(u, v)|` over sampled points and tangent pairs.
fn potential_defect<T: Real>(potential: &SymplecticPotential<T>, dim: usize) -> Result<T> {
    let mut rng = seeded(CHECK_SEED ^ 0x77);
    let mut worst = T::zero();
    let sphere = match potential {
        SymplecticPotential::Base(_) => false,
        SymplecticPotential::Scaled { connection, .. } => connection.sphere_bundle().is_some(),
    };
    if sphere != (dim == 3) {
        return Err(MaslovError::WrongBundle);
    }
    if sphere {
        let SymplecticPotential::Scaled { connection, scale } = potential else {
            unreachable!("sphere potentials are scaled connections")
        };
        for _ in 0..16 {
            let p: SpherePoint<T> = random_sphere_point(&mut rng);
            let (e1, e2) = p.tangent_basis();
            let x = DVector::from_column_slice(p.vector().as_slice());
            let u = DVector::from_column_slice(e1.as_slice());
            let v = DVector::from_column_slice(e2.as_slice());
            let d = *scale * curvature(connection, &x, &u, &v)? + omega_s2(&p, &e1, &e2)?;
            worst = worst.max(d.abs());
        }
        return Ok(worst);
    }
    let (tau, scale) = match potential {
        SymplecticPotential::Base(tau) => (tau, T::one()),
        SymplecticPotential::Scaled { connection, scale } => match connection.kind() {
            BundleKind::Trivial { dim: d } if d == dim => (connection.tau(), *scale),
            _ => return Err(MaslovError::WrongBundle),
        },
    };
    tau.check_dim(dim)?;
    let omega = standard_symplectic::<T>(dim / 2)?;
    for _ in 0..8 {
        let x: DVector<T> = gaussian_vector(&mut rng, dim);
        for i in 0..dim {
            for j in (i + 1)..dim {
                let d = scale * tau.exterior_derivative(&x, &unit(dim, i), &unit(dim, j))
                    + omega.matrix()[(i, j)];
                worst = worst.max(d.abs());
            }
        }
    }
    Ok(worst)
}

/// Builds the momentum map after checking `dη = −π*ω` at sampled points to `1e-8`.
pub fn momentum_map<T: Real>(
    action: &MomentumAction<T>,
    potential: SymplecticPotential<T>,
) -> Result<MomentumMap<T>> {
    let generators: Vec<Generator<T>> = match action {
        MomentumAction::Circle(c) => vec![Generator::of(c)],
        MomentumAction::Torus(t) => t.components.iter().map(Generator::of).collect(),
        MomentumAction::Rotations => (0..3).map(|i| Generator::Rotation(Vector3::ith(i, T::one()))).collect(),
    };
    let dim = match action {
        MomentumAction::Circle(c) => c.dim(),
        MomentumAction::Torus(t) => t.components[0].dim(),
        MomentumAction::Rotations => 3,
    };
    let defect = potential_defect(&potential, dim)?;
    if defect > T::tol(1e-8) {
        return Err(MaslovError::NotAPotential { defect: defect.as_f64() });
    }
    Ok(MomentumMap { generators, potential, dim, potential_defect: defect })
}

impl<T: Real> MomentumMap<T> {
    pub fn components(&self) -> usize {
        self.generators.len()
    }

    fn check(&self, x: &DVector<T>) -> Result<()> {
        if x.len() != self.dim {
            return Err(MaslovError::InvalidDimension(format!(
                "point has {} coordinates, expected {}",
                x.len(),
                self.dim
            )));
        }
        if self.dim == 3 {
            SpherePoint::new(Vector3::from_column_slice(x.as_slice()))?;
        }
        Ok(())
    }

    fn component(&self, k: usize, x: &DVector<T>) -> Result<T> {
        match &self.potential {
            SymplecticPotential::Base(tau) => Ok(tau.eval(x, &self.generators[k].base_field(x)?)),
            SymplecticPotential::Scaled { connection, scale } => {
                let w = fiber_point_over(connection, x)?;
                let v = self.generators[k].lifted(&w)?;
                Ok(*scale * connection_eval(connection, &w, &v)?)
            }
        }
    }

    /// `μ_x`, one entry per generator.
    pub fn eval(&self, x: &DVector<T>) -> Result<DVector<T>> {
        self.check(x)?;
        let vals = (0..self.generators.len())
            .map(|k| self.component(k, x))
            .collect::<Result<Vec<_>>>()?;
        Ok(DVector::from_vec(vals))
    }

    /// `μ` evaluated from an arbitrary point `w` of the fiber.
    pub fn eval_at(&self, w: &TotalSpacePoint<T>) -> Result<DVector<T>> {
        let x = w.base();
        self.check(&x)?;
        let vals = (0..self.generators.len())
            .map(|k| match &self.potential {
                SymplecticPotential::Base(tau) => {
                    Ok(tau.eval(&x, &self.generators[k].base_field(&x)?))
                }
                SymplecticPotential::Scaled { connection, scale } => {
                    let v = self.generators[k].lifted(w)?;
                    Ok(*scale * connection_eval(connection, w, &v)?)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DVector::from_vec(vals))
    }

    /// `max_u |dH_k(u) − ω(X_k, u)|` over a tangent basis at `x`, with `dH_k`
    /// from central differences at step [`FD_STEP`].
    pub fn hamiltonian_defect(&self, k: usize, x: &DVector<T>) -> Result<T> {
        self.check(x)?;
        let h = T::lit(FD_STEP);
        let xf = self.generators[k].base_field(x)?;
        let mut worst = T::zero();
        if self.dim == 3 {
            let p = SpherePoint::new(Vector3::from_column_slice(x.as_slice()))?;
            let (e1, e2) = p.tangent_basis();
            let xv = Vector3::from_column_slice(xf.as_slice());
            for e in [e1, e2] {
                let at = |s: T| DVector::from_column_slice((p.vector() * s.cos() + e * s.sin()).as_slice());
                let dh = (self.component(k, &at(h))? - self.component(k, &at(-h))?) / (h + h);
                worst = worst.max((dh - omega_s2(&p, &xv, &e)?).abs());
            }
        } else {
            let omega = standard_symplectic::<T>(self.dim / 2)?;
            for i in 0..self.dim {
                let e = unit(self.dim, i);
                let dh = (self.component(k, &(x + &e * h))? - self.component(k, &(x - &e * h))?)
                    / (h + h);
                worst = worst.max((dh - omega.eval(&xf, &e)).abs());
            }
        }
        Ok(worst)
    }
}

/// Largest change of `f(Φ_t* v)` against `f(v)` over sampled points,
/// tangents and times.
pub fn invariance_defect<T: Real>(action: &CircleActionSpec<T>, beta: &ConnectionForm<T>) -> Result<T> {
    let mut rng = seeded(CHECK_SEED ^ 0x1f);
    let mut worst = T::zero();
    for _ in 0..8 {
        let (w, v) = match (action, beta.kind()) {
            (CircleActionSpec::Linear { .. }, BundleKind::Trivial { dim }) if dim == action.dim() => {
                let x: DVector<T> = gaussian_vector(&mut rng, dim);
                let u: DVector<T> = gaussian_vector(&mut rng, dim);
                (
                    TotalSpacePoint::trivial(x, Phase::from_turns(T::lit(0.3))),
                    TangentVector::Trivial { base: u, fiber: T::lit(0.7) },
                )
            }
            (CircleActionSpec::Sphere(_), BundleKind::Sphere(b)) => {
                let p: SpherePoint<T> = random_sphere_point(&mut rng);
                let xi = random_tangent(&mut rng, &p) + Vector3::z() * T::lit(0.4);
                (TotalSpacePoint::sphere(frame_over(&p), b.level), TangentVector::Sphere(xi))
            }
            _ => return Err(MaslovError::WrongBundle),
        };
        let f0 = connection_eval(beta, &w, &v)?;
        for t in [0.1, 0.37, 0.81] {
            let t = T::lit(t);
            let wt = lifted_flow_gamma2(action, t, &w)?;
            let vt = match &v {
                TangentVector::Trivial { base, fiber } => {
                    TangentVector::Trivial { base: action.matrix_at(t) * base, fiber: *fiber }
                }
                TangentVector::Sphere(xi) => TangentVector::Sphere(*xi),
            };
            worst = worst.max((connection_eval(beta, &wt, &vt)? - f0).abs());
        }
    }
    Ok(worst)
}

/// `max_k |Q(x(t_k)) − Q(x₀)|` along `steps` equal steps of the orbit, where
/// `π*Q = f(𝒳)` for the lifted generator `𝒳`.
pub fn check_conservation<T: Real>(
    action: &CircleActionSpec<T>,
    beta: &ConnectionForm<T>,
    x0: &DVector<T>,
    steps: usize,
) -> Result<T> {
    action.check_point(x0)?;
    let defect = invariance_defect(action, beta)?;
    if defect > T::tol(1e-9) {
        return Err(MaslovError::InvariantConnectionRequired { defect: defect.as_f64() });
    }
    if steps == 0 {
        return Err(MaslovError::InvalidInput("need at least one step".into()));
    }
    let q = |x: &DVector<T>| -> Result<T> {
        let w = fiber_point_over(beta, x)?;
        connection_eval(beta, &w, &lifted_generator(action, &w)?)
    };
    let q0 = q(x0)?;
    let mut drift = T::zero();
    for k in 1..=steps {
        let t = T::from_int(k as i64) / T::from_int(steps as i64);
        let x = flow(action, t, x0)?;
        let x = if action.dim() == 3 { &x / x.norm() } else { x };
        drift = drift.max((q(&x)? - q0).abs());
    }
    Ok(drift)
}

/// Local indices at a set of fixed points.
#[derive(Debug, Clone, PartialEq)]
pub struct EqualIndices<T: Real> {
    pub points: Vec<DVector<T>>,
    pub indices: Vec<i64>,
    pub all_equal: bool,
}

/// Local indices at the fixed points among `points` of a linear action.
pub fn equal_indices_at<T: Real>(
    action: &CircleActionSpec<T>,
    points: &[DVector<T>],
) -> Result<EqualIndices<T>> {
    if let CircleActionSpec::Sphere(_) = action {
        return Err(MaslovError::InvalidInput(
            "index equality holds for flat bundles over R^2n; the sphere bundle is not flat".into(),
        ));
    }
    let mut fixed = Vec::new();
    for p in points {
        if is_fixed_point(action, p)? {
            fixed.push(p.clone());
        }
    }
    if fixed.is_empty() {
        return Err(MaslovError::NoFixedPoints);
    }
    let indices = fixed.iter().map(|p| local_index(action, p)).collect::<Result<Vec<_>>>()?;
    let all_equal = indices.windows(2).all(|w| w[0] == w[1]);
    Ok(EqualIndices { points: fixed, indices, all_equal })
}

/// Samples `count` points of the fixed subspace `{zⱼ = 0 : mⱼ ≠ 0}` and
/// compares the local indices there.
pub fn equal_indices_flat<T: Real>(
    weights: &[i64],
    count: usize,
    seed: u64,
) -> Result<EqualIndices<T>> {
    let action = CircleActionSpec::<T>::linear(weights.to_vec())?;
    let n = weights.len();
    let free: Vec<usize> = (0..n).filter(|&j| weights[j] == 0).collect();
    let mut rng = seeded(seed);
    let points: Vec<DVector<T>> = if free.is_empty() {
        vec![DVector::zeros(2 * n)]
    } else {
        (0..count.max(1))
            .map(|_| {
                let g: DVector<T> = gaussian_vector(&mut rng, 2 * n);
                DVector::from_fn(2 * n, |i, _| if free.contains(&(i % n)) { g[i] } else { T::zero() })
            })
            .collect()
    };
    equal_indices_at(&action, &points)
}
