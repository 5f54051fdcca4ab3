//! The round sphere and its unitary frame bundle `Γ ≅ SO(3)`.
//!
//! A frame `(u, p×u)` at `p` is the rotation `[u, p×u, p]`; the base point
//! is the third column. The structural circle acts on the right by rotations
//! about the third body axis. Tangent vectors at a frame `w` are stored in
//! body coordinates `ξ` with `ẇ = w·ξ̂`.

use nalgebra::{Matrix3, Rotation3, Vector3};

use crate::bundle::{connection_eval, ConnectionForm, TangentVector, TotalSpacePoint};
use crate::error::{MaslovError, Result};
use crate::forms::FD_STEP;
use crate::grassmann::{loop_degree, Phase, SampledLoop};
use crate::scalar::Real;

pub type So3Vector<T> = Vector3<T>;

/// Sense of the structural circle action relative to `(u, p×u)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Orientation {
    /// Positive `θ` turns `u` towards `p×u`.
    #[default]
    RightHanded,
    Reversed,
}

impl Orientation {
    pub fn sign(self) -> i64 {
        match self {
            Orientation::RightHanded => 1,
            Orientation::Reversed => -1,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Orientation::RightHanded => Orientation::Reversed,
            Orientation::Reversed => Orientation::RightHanded,
        }
    }
}

/// Which circle bundle over S² a frame represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SphereLevel {
    /// `Γ = SO(3)`.
    #[default]
    Gamma,
    /// `Γ² = SO(3)/{R_z(π)}`: one structural turn is a half-turn of frames.
    GammaSquared,
}

impl SphereLevel {
    pub fn factor(self) -> i64 {
        match self {
            SphereLevel::Gamma => 1,
            SphereLevel::GammaSquared => 2,
        }
    }
}

/// Orientation and level of a frame bundle over S².
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SphereBundle {
    pub orientation: Orientation,
    pub level: SphereLevel,
}

impl SphereBundle {
    pub fn new(orientation: Orientation, level: SphereLevel) -> Self {
        Self { orientation, level }
    }

    pub fn gamma(orientation: Orientation) -> Self {
        Self::new(orientation, SphereLevel::Gamma)
    }

    pub fn gamma_squared(orientation: Orientation) -> Self {
        Self::new(orientation, SphereLevel::GammaSquared)
    }

    pub fn sign<T: Real>(&self) -> T {
        T::from_int(self.orientation.sign())
    }

    /// Frame angle of one structural turn: `2πs/L`.
    pub fn turn_angle<T: Real>(&self) -> T {
        T::two_pi() * self.sign::<T>() / T::from_int(self.level.factor())
    }

    /// `w·R_z(2πsθ/L)`.
    pub fn structural_action<T: Real>(&self, w: &SO3Element<T>, theta: T) -> SO3Element<T> {
        SO3Element { r: w.r * rot_z(self.turn_angle::<T>() * theta) }
    }

    /// Body coordinates of `∂/∂θ`.
    pub fn structural_generator<T: Real>(&self) -> Vector3<T> {
        Vector3::z() * self.turn_angle::<T>()
    }

    /// Curvature constant `r` of the invariant connection in `df = r·π*ω`,
    /// from the Maurer–Cartan structure equation. Tests compare it with
    /// [`measure_r`].
    pub fn invariant_curvature_constant<T: Real>(&self) -> T {
        -T::from_int(self.level.factor()) * self.sign::<T>() / T::two_pi()
    }

    /// Structural turns `θ` with `w₁ = w₀·(structural θ)`, defined mod `1`.
    pub fn fiber_offset<T: Real>(&self, w0: &SO3Element<T>, w1: &SO3Element<T>) -> Result<T> {
        let m = w0.r.transpose() * w1.r;
        let defect = (m[(2, 2)] - T::one()).abs() + m[(0, 2)].abs() + m[(1, 2)].abs();
        if defect > T::tol(1e-8) {
            return Err(MaslovError::InvalidInput(format!(
                "frames lie over different base points (defect {:e})",
                defect.as_f64()
            )));
        }
        let alpha = m[(1, 0)].atan2(m[(0, 0)]);
        Ok(alpha / self.turn_angle::<T>())
    }
}

pub(crate) fn rot_z<T: Real>(angle: T) -> Matrix3<T> {
    crate::quadrature::rot_z(angle)
}

/// `v̂` with `v̂x = v × x`.
pub fn hat<T: Real>(v: &Vector3<T>) -> Matrix3<T> {
    v.cross_matrix()
}

/// A point of the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpherePoint<T: Real> {
    p: Vector3<T>,
}

impl<T: Real> SpherePoint<T> {
    pub fn new(p: Vector3<T>) -> Result<Self> {
        let dev = (p.norm() - T::one()).abs();
        if dev > T::tol(1e-12) {
            return Err(MaslovError::InvalidInput(format!(
                "sphere point has norm off by {:e}",
                dev.as_f64()
            )));
        }
        Ok(Self { p })
    }

    pub fn normalized(v: Vector3<T>) -> Result<Self> {
        let n = v.norm();
        if n <= T::default_epsilon() {
            return Err(MaslovError::InvalidInput("zero vector has no direction".into()));
        }
        Ok(Self { p: v / n })
    }

    pub fn north() -> Self {
        Self { p: Vector3::z() }
    }

    pub fn south() -> Self {
        Self { p: -Vector3::z() }
    }

    pub fn vector(&self) -> &Vector3<T> {
        &self.p
    }

    fn check_tangent(&self, u: &Vector3<T>) -> Result<()> {
        let defect = u.dot(&self.p).abs();
        if defect > T::tol(1e-10) * u.norm().max(T::one()) {
            return Err(MaslovError::NotTangent { defect: defect.as_f64() });
        }
        Ok(())
    }

    /// An orthonormal tangent basis `(e₁, e₂)` with `e₁ × e₂ = p`.
    pub fn tangent_basis(&self) -> (Vector3<T>, Vector3<T>) {
        let p = self.p;
        let seed = if p.x.abs() < T::lit(0.9) { Vector3::x() } else { Vector3::y() };
        let e1 = (seed - p * p.dot(&seed)).normalize();
        (e1, p.cross(&e1))
    }
}

/// `ω(u, v) = p·(u×v)`.
pub fn omega_s2<T: Real>(p: &SpherePoint<T>, u: &Vector3<T>, v: &Vector3<T>) -> Result<T> {
    p.check_tangent(u)?;
    p.check_tangent(v)?;
    Ok(p.p.dot(&u.cross(v)))
}

/// `J(u) = −p×u`.
pub fn j_s2<T: Real>(p: &SpherePoint<T>, u: &Vector3<T>) -> Result<Vector3<T>> {
    p.check_tangent(u)?;
    Ok(-p.p.cross(u))
}

/// A rotation matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SO3Element<T: Real> {
    r: Matrix3<T>,
}

impl<T: Real> SO3Element<T> {
    pub fn new(r: Matrix3<T>) -> Result<Self> {
        let orth = (r.transpose() * r - Matrix3::identity()).norm();
        let det = r.determinant();
        if orth > T::tol(1e-10) || (det - T::one()).abs() > T::tol(1e-10) {
            return Err(MaslovError::InvalidFrame(format!(
                "not a rotation (orthogonality defect {:e}, det {})",
                orth.as_f64(),
                det.as_f64()
            )));
        }
        Ok(Self { r })
    }

    pub fn identity() -> Self {
        Self { r: Matrix3::identity() }
    }

    /// `exp(v̂)`: rotation by `|v|` about `v`.
    pub fn exp(v: &So3Vector<T>) -> Self {
        Self { r: *Rotation3::new(*v).matrix() }
    }

    /// The rotation vector of angle in `[0, π]`.
    pub fn log(&self) -> So3Vector<T> {
        Rotation3::from_matrix_unchecked(self.r).scaled_axis()
    }

    /// Rotation by `angle` about the unit `axis`.
    pub fn about(axis: &Vector3<T>, angle: T) -> Self {
        Self::exp(&(axis.normalize() * angle))
    }

    /// The smallest rotation taking the unit vector `a` to `b`, if they are not antipodal.
    pub fn minimal_rotation(a: &Vector3<T>, b: &Vector3<T>) -> Option<Self> {
        Rotation3::rotation_between(a, b).map(|r| Self { r: *r.matrix() })
    }

    pub fn matrix(&self) -> &Matrix3<T> {
        &self.r
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self { r: self.r * other.r }
    }

    pub fn inverse(&self) -> Self {
        Self { r: self.r.transpose() }
    }

    pub fn apply(&self, v: &Vector3<T>) -> Vector3<T> {
        self.r * v
    }

    /// The base point `w ẑ`.
    pub fn base(&self) -> SpherePoint<T> {
        SpherePoint { p: self.r.column(2).into_owned() }
    }

    pub fn distance(&self, other: &Self) -> T {
        (self.r - other.r).norm()
    }
}

/// `[u, p×u, p]`.
pub fn frame_to_so3<T: Real>(p: &SpherePoint<T>, u: &Vector3<T>) -> Result<SO3Element<T>> {
    let nu = (u.norm() - T::one()).abs();
    let perp = u.dot(&p.p).abs();
    if nu > T::tol(1e-10) || perp > T::tol(1e-10) {
        return Err(MaslovError::InvalidFrame(format!(
            "u must be a unit tangent (norm defect {:e}, normal component {:e})",
            nu.as_f64(),
            perp.as_f64()
        )));
    }
    let m = Matrix3::from_columns(&[*u, p.p.cross(u), p.p]);
    SO3Element::new(m)
}

/// Reads `(p, u)` back from `[u, p×u, p]`.
pub fn so3_to_frame<T: Real>(w: &SO3Element<T>) -> (SpherePoint<T>, Vector3<T>) {
    (w.base(), w.r.column(0).into_owned())
}

/// Left multiplication: `[u, p×u, p] ↦ [au, ap×au, ap]`.
pub fn lifted_action<T: Real>(a: &SO3Element<T>, w: &SO3Element<T>) -> SO3Element<T> {
    a.mul(w)
}

/// A frame over `p`: the minimal rotation from `ẑ`, or from `−ẑ` near the south pole.
pub fn frame_over<T: Real>(p: &SpherePoint<T>) -> SO3Element<T> {
    if p.p.z >= T::zero() {
        north_section(p).expect("defined on the closed northern hemisphere")
    } else {
        south_section(p).expect("defined on the closed southern hemisphere")
    }
}

/// Frames over `S² ∖ {S}`: the minimal rotation taking `ẑ` to `p`.
pub fn north_section<T: Real>(p: &SpherePoint<T>) -> Option<SO3Element<T>> {
    if p.p.z <= -T::one() + T::lit(1e-9) {
        return None;
    }
    SO3Element::minimal_rotation(&Vector3::z(), &p.p)
}

/// Frames over `S² ∖ {N}`: the minimal rotation from `−ẑ` applied to `diag(1, −1, −1)`.
pub fn south_section<T: Real>(p: &SpherePoint<T>) -> Option<SO3Element<T>> {
    if p.p.z >= T::one() - T::lit(1e-9) {
        return None;
    }
    let flip = Matrix3::from_diagonal(&Vector3::new(T::one(), -T::one(), -T::one()));
    SO3Element::minimal_rotation(&-Vector3::z(), &p.p).map(|r| SO3Element { r: r.r * flip })
}

/// Degree of `φ ↦ θ(φ)` with `σ_S = σ_N·(structural θ)` along the equator
/// traversed counter-clockwise as seen from the north pole.
pub fn clutching_degree<T: Real>(bundle: &SphereBundle, samples: usize) -> Result<i64> {
    let l = SampledLoop::try_uniform::<T>(samples, |t| {
        let phi = T::two_pi() * T::lit(t);
        let p = SpherePoint { p: Vector3::new(phi.cos(), phi.sin(), T::zero()) };
        let n = north_section(&p).ok_or_else(|| MaslovError::Internal("north section".into()))?;
        let s = south_section(&p).ok_or_else(|| MaslovError::Internal("south section".into()))?;
        Ok(Phase::from_turns(bundle.fiber_offset(&n, &s)?))
    })?;
    Ok(loop_degree(&l)?.degree)
}

/// Finite-difference estimate of `df(∂_a, ∂_b)` on the chart
/// `(a, b) ↦ w·exp(a ê₁)·exp(b ê₂)` at the origin, where `ω(∂_a, ∂_b) = 1`.
pub fn curvature_fd<T: Real>(beta: &ConnectionForm<T>, w: &SO3Element<T>) -> Result<T> {
    let level = beta.sphere_bundle().ok_or(MaslovError::WrongBundle)?.level;
    let h = T::lit(FD_STEP);
    let e1 = Vector3::x();
    let e2 = Vector3::y();
    let chart = |a: T, b: T| SO3Element { r: w.r * rot_axis(&e1, a) * rot_axis(&e2, b) };
    let fa = |a: T, b: T| -> Result<T> {
        let body = rot_axis(&e2, -b) * e1;
        connection_eval(beta, &TotalSpacePoint::sphere(chart(a, b), level), &TangentVector::Sphere(body))
    };
    let fb = |a: T, b: T| -> Result<T> {
        connection_eval(beta, &TotalSpacePoint::sphere(chart(a, b), level), &TangentVector::Sphere(e2))
    };
    let two_h = h + h;
    let dfb_da = (fb(h, T::zero())? - fb(-h, T::zero())?) / two_h;
    let dfa_db = (fa(T::zero(), h)? - fa(T::zero(), -h)?) / two_h;
    Ok(dfb_da - dfa_db)
}

fn rot_axis<T: Real>(axis: &Vector3<T>, angle: T) -> Matrix3<T> {
    *Rotation3::new(*axis * angle).matrix()
}

/// Fit of `df = r·π*ω` over sample frames.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureFit {
    pub r: f64,
    /// `max − min` of the pointwise ratios.
    pub spread: f64,
    pub samples: usize,
}

/// Measures `r` by finite differences at each frame.
pub fn measure_r<T: Real>(beta: &ConnectionForm<T>, frames: &[SO3Element<T>]) -> Result<CurvatureFit> {
    if frames.is_empty() {
        return Err(MaslovError::InvalidInput("no frames to measure r at".into()));
    }
    let vals = frames
        .iter()
        .map(|w| curvature_fd(beta, w).map(|x| x.as_f64()))
        .collect::<Result<Vec<f64>>>()?;
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    let max = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(CurvatureFit { r: mean, spread: max - min, samples: vals.len() })
}

/// Body coordinates at `w` of the left-action generator `v`: `wᵀv`.
pub fn generator_body<T: Real>(w: &SO3Element<T>, v: &So3Vector<T>) -> Vector3<T> {
    w.r.transpose() * v
}

/// `H_v(p) = −(1/r)·f(𝒳_v)` at a frame over `p`.
pub fn hamiltonian_of_rotation<T: Real>(
    beta: &ConnectionForm<T>,
    r: T,
    v: &So3Vector<T>,
    p: &SpherePoint<T>,
) -> Result<T> {
    hamiltonian_at_frame(beta, r, v, &frame_over(p))
}

/// `−(1/r)·f(𝒳_v)` at the frame `w`.
pub fn hamiltonian_at_frame<T: Real>(
    beta: &ConnectionForm<T>,
    r: T,
    v: &So3Vector<T>,
    w: &SO3Element<T>,
) -> Result<T> {
    if r == T::zero() {
        return Err(MaslovError::InvalidInput("curvature constant r is zero".into()));
    }
    let level = beta.sphere_bundle().ok_or(MaslovError::WrongBundle)?.level;
    let f = connection_eval(
        beta,
        &TotalSpacePoint::sphere(*w, level),
        &TangentVector::Sphere(generator_body(w, v)),
    )?;
    Ok(-f / r)
}

/// The phase `z` with `h·w = w·z` for frames `w` over `p`.
pub fn isotropy_phase<T: Real>(
    bundle: &SphereBundle,
    p: &SpherePoint<T>,
    h: &SO3Element<T>,
) -> Result<Phase<T>> {
    isotropy_phase_at(bundle, &frame_over(p), h)
}

/// [`isotropy_phase`] computed from a given fiber point.
pub fn isotropy_phase_at<T: Real>(
    bundle: &SphereBundle,
    w: &SO3Element<T>,
    h: &SO3Element<T>,
) -> Result<Phase<T>> {
    let p = w.base();
    let defect = (h.apply(&p.p) - p.p).norm();
    if defect > T::tol(1e-10) {
        return Err(MaslovError::NotIsotropy { defect: defect.as_f64() });
    }
    Ok(Phase::from_turns(bundle.fiber_offset(w, &h.mul(w))?))
}

/// Numerical rank of the lifted-action generators at `w` and their
/// smallest singular value, from central differences of `exp(t êᵢ)·w`.
pub fn transitivity_rank<T: Real>(w: &SO3Element<T>) -> (usize, T) {
    let h = T::lit(FD_STEP);
    let cols: Vec<nalgebra::DVector<T>> = (0..3)
        .map(|i| {
            let e = Vector3::ith(i, T::one());
            let d = (SO3Element::exp(&(e * h)).r * w.r - SO3Element::exp(&(e * -h)).r * w.r)
                / (h + h);
            nalgebra::DVector::from_column_slice(d.as_slice())
        })
        .collect();
    numerical_rank(&nalgebra::DMatrix::from_columns(&cols))
}

/// Rank of the base-action generators `eᵢ × p` at `p`.
pub fn base_rank<T: Real>(p: &SpherePoint<T>) -> (usize, T) {
    let cols: Vec<nalgebra::DVector<T>> = (0..3)
        .map(|i| {
            let g = Vector3::<T>::ith(i, T::one()).cross(&p.p);
            nalgebra::DVector::from_column_slice(g.as_slice())
        })
        .collect();
    numerical_rank(&nalgebra::DMatrix::from_columns(&cols))
}

/// Singular values above `1e-6` count towards the rank.
fn numerical_rank<T: Real>(m: &nalgebra::DMatrix<T>) -> (usize, T) {
    let sv = m.clone().singular_values();
    let keep: Vec<T> = sv.iter().copied().filter(|s| *s > T::lit(1e-6)).collect();
    let min = keep.iter().copied().fold(T::max_value().unwrap_or_else(T::one), |a, b| a.min(b));
    (keep.len(), if keep.is_empty() { T::zero() } else { min })
}

/// Rotation of S² about `axis` at `speed` turns per unit time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereRotation<T: Real> {
    axis: Vector3<T>,
    speed: i64,
}

impl<T: Real> SphereRotation<T> {
    pub fn new(axis: Vector3<T>, speed: i64) -> Result<Self> {
        let n = axis.norm();
        if n <= T::tol(1e-12) {
            return Err(MaslovError::InvalidInput("rotation axis is zero".into()));
        }
        Ok(Self { axis: axis / n, speed })
    }

    pub fn about(axis: Vector3<T>) -> Result<Self> {
        Self::new(axis, 1)
    }

    pub fn axis(&self) -> &Vector3<T> {
        &self.axis
    }

    pub fn speed(&self) -> i64 {
        self.speed
    }

    /// Rotation by `2π·speed·t` about the axis.
    pub fn at(&self, t: T) -> SO3Element<T> {
        SO3Element::exp(&(self.axis * (T::two_pi() * T::from_int(self.speed) * t)))
    }

    /// `𝔰𝔬(3)` generator `2π·speed·axis`.
    pub fn generator(&self) -> So3Vector<T> {
        self.axis * (T::two_pi() * T::from_int(self.speed))
    }

    pub fn fixes(&self, p: &SpherePoint<T>) -> bool {
        self.speed == 0 || self.axis.cross(&p.p).norm() <= T::tol(1e-10)
    }
}

/// Windings of the fiber orbit over a fixed point in `Γ` and in `Γ²`.
pub fn gamma_winding_pair<T: Real>(
    rotation: &SphereRotation<T>,
    p: &SpherePoint<T>,
    orientation: Orientation,
    samples: usize,
) -> Result<(i64, i64)> {
    if !rotation.fixes(p) {
        let defect = rotation.axis.cross(&p.p).norm();
        return Err(MaslovError::NotFixedPoint { defect: defect.as_f64() });
    }
    let w = frame_over(p);
    let winding = |bundle: SphereBundle| -> Result<i64> {
        let l = SampledLoop::try_uniform::<T>(samples, |t| {
            let moved = rotation.at(T::lit(t)).mul(&w);
            Ok(Phase::from_turns(bundle.fiber_offset(&w, &moved)?))
        })?;
        Ok(loop_degree(&l)?.degree)
    };
    let first = winding(SphereBundle::gamma(orientation))?;
    let second = winding(SphereBundle::gamma_squared(orientation))?;
    if second != 2 * first {
        return Err(MaslovError::Internal(format!(
            "Gamma-squared winding {second} is not twice the Gamma winding {first}"
        )));
    }
    Ok((first, second))
}
