//! Principal circle bundles, connection 1-forms, Maslov data, curvature,
//! holonomy and the characteristic number.
//!
//! The structural circle has period 1. A connection is stored as its
//! vertical normalization plus the pull-back of a base 1-form `τ`:
//! `f = dθ + π*τ` on `ℝ²ⁿ × S¹`, and `f = f_inv + π*σ` on the sphere
//! bundles, where `f_inv` is the normalized third Maurer–Cartan coordinate
//! and `σ` is an ambient 1-form on ℝ³ restricted to tangents of S².

use nalgebra::{DVector, Vector3};

use crate::error::{MaslovError, Result};
use crate::forms::OneForm;
use crate::grassmann::{LoopPayload, Phase, SampledLoop};
use crate::quadrature::{gauss_legendre, SphereRule};
use crate::scalar::Real;
use crate::sphere::{omega_s2, SO3Element, SphereBundle, SphereLevel, SpherePoint};

/// Polar × azimuthal nodes of the sphere curvature quadrature.
pub const SPHERE_RULE: (usize, usize) = (64, 128);
/// Maximum change of the characteristic number between the coarse and fine rules.
pub const CHARACTERISTIC_CONVERGENCE_TOL: f64 = 1e-6;
/// Largest structural step (in turns) between consecutive loop samples.
pub const FIBER_STEP_GUARD: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BundleKind {
    /// `ℝ^dim × S¹`.
    Trivial { dim: usize },
    Sphere(SphereBundle),
}

/// Direction convention for holonomy phases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HolonomySign {
    /// Transport accumulates `e^{−2πi ∮ s*f}` relative to a section `s`.
    #[default]
    Standard,
    Flipped,
}

/// A point of a total space.
#[derive(Debug, Clone, PartialEq)]
pub enum TotalSpacePoint<T: Real> {
    Trivial { base: DVector<T>, fiber: Phase<T> },
    /// A frame; at [`SphereLevel::GammaSquared`] it stands for its class mod `R_z(π)`.
    Sphere { frame: SO3Element<T>, level: SphereLevel },
}

impl<T: Real> TotalSpacePoint<T> {
    pub fn trivial(base: DVector<T>, fiber: Phase<T>) -> Self {
        TotalSpacePoint::Trivial { base, fiber }
    }

    pub fn sphere(frame: SO3Element<T>, level: SphereLevel) -> Self {
        TotalSpacePoint::Sphere { frame, level }
    }

    /// The base point; a unit 3-vector for sphere bundles.
    pub fn base(&self) -> DVector<T> {
        match self {
            TotalSpacePoint::Trivial { base, .. } => base.clone(),
            TotalSpacePoint::Sphere { frame, .. } => {
                DVector::from_column_slice(frame.base().vector().as_slice())
            }
        }
    }
}

/// Representative of `b` closest to `a` among `b` and `b·R_z(π)`.
fn nearest_rep<T: Real>(a: &SO3Element<T>, b: &SO3Element<T>, level: SphereLevel) -> SO3Element<T> {
    match level {
        SphereLevel::Gamma => *b,
        SphereLevel::GammaSquared => {
            let alt = b.mul(&SO3Element::about(&Vector3::z(), T::pi()));
            if a.distance(&alt) < a.distance(b) {
                alt
            } else {
                *b
            }
        }
    }
}

impl<T: Real> LoopPayload<T> for TotalSpacePoint<T> {
    fn loop_distance(&self, other: &Self) -> T {
        match (self, other) {
            (
                TotalSpacePoint::Trivial { base: a, fiber: fa },
                TotalSpacePoint::Trivial { base: b, fiber: fb },
            ) if a.len() == b.len() => (a - b).norm() + fa.distance(fb),
            (
                TotalSpacePoint::Sphere { frame: a, level: la },
                TotalSpacePoint::Sphere { frame: b, level: lb },
            ) if la == lb => a.distance(&nearest_rep(a, b, *la)),
            _ => T::max_value().unwrap_or_else(T::one),
        }
    }
}

/// A tangent vector to a total space.
#[derive(Debug, Clone, PartialEq)]
pub enum TangentVector<T: Real> {
    /// Base velocity and `∂/∂θ` coefficient.
    Trivial { base: DVector<T>, fiber: T },
    /// Body coordinates `w⁻¹ẇ`.
    Sphere(Vector3<T>),
}

/// A connection 1-form `f` with `f(∂/∂θ) = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionForm<T: Real> {
    kind: BundleKind,
    tau: OneForm<T>,
}

impl<T: Real> ConnectionForm<T> {
    /// `dθ + π*τ` on `ℝ^dim × S¹`.
    pub fn trivial(dim: usize, tau: OneForm<T>) -> Result<Self> {
        if dim == 0 || !dim.is_multiple_of(2) {
            return Err(MaslovError::InvalidDimension(format!(
                "trivial bundle base must be even-dimensional, got {dim}"
            )));
        }
        tau.check_dim(dim)?;
        Ok(Self { kind: BundleKind::Trivial { dim }, tau })
    }

    /// The left-invariant connection.
    pub fn sphere_invariant(bundle: SphereBundle) -> Self {
        Self { kind: BundleKind::Sphere(bundle), tau: OneForm::Zero }
    }

    /// `f_inv + π*σ` with `σ` a 1-form on ℝ³.
    pub fn sphere_perturbed(bundle: SphereBundle, sigma: OneForm<T>) -> Result<Self> {
        sigma.check_dim(3)?;
        Ok(Self { kind: BundleKind::Sphere(bundle), tau: sigma })
    }

    /// `f + π*σ`.
    pub fn gauge_shift(&self, sigma: OneForm<T>) -> Result<Self> {
        let dim = match self.kind {
            BundleKind::Trivial { dim } => dim,
            BundleKind::Sphere(_) => 3,
        };
        sigma.check_dim(dim)?;
        Ok(Self { kind: self.kind, tau: self.tau.clone().plus(sigma) })
    }

    pub fn kind(&self) -> BundleKind {
        self.kind
    }

    pub fn tau(&self) -> &OneForm<T> {
        &self.tau
    }

    pub fn sphere_bundle(&self) -> Option<SphereBundle> {
        match self.kind {
            BundleKind::Sphere(b) => Some(b),
            BundleKind::Trivial { .. } => None,
        }
    }

    /// The vertical generator at `w`.
    pub fn vertical(&self, w: &TotalSpacePoint<T>) -> Result<TangentVector<T>> {
        match (self.kind, w) {
            (BundleKind::Trivial { dim }, TotalSpacePoint::Trivial { base, .. })
                if base.len() == dim =>
            {
                Ok(TangentVector::Trivial { base: DVector::zeros(dim), fiber: T::one() })
            }
            (BundleKind::Sphere(b), TotalSpacePoint::Sphere { level, .. }) if *level == b.level => {
                Ok(TangentVector::Sphere(b.structural_generator()))
            }
            _ => Err(MaslovError::WrongBundle),
        }
    }

    /// Right action of the structural circle by `θ` turns.
    pub fn structural_action(&self, w: &TotalSpacePoint<T>, theta: T) -> Result<TotalSpacePoint<T>> {
        match (self.kind, w) {
            (BundleKind::Trivial { .. }, TotalSpacePoint::Trivial { base, fiber }) => {
                Ok(TotalSpacePoint::Trivial {
                    base: base.clone(),
                    fiber: fiber.mul(&Phase::from_turns(theta)),
                })
            }
            (BundleKind::Sphere(b), TotalSpacePoint::Sphere { frame, level }) if *level == b.level => {
                Ok(TotalSpacePoint::Sphere { frame: b.structural_action(frame, theta), level: *level })
            }
            _ => Err(MaslovError::WrongBundle),
        }
    }
}

/// `f_w(v)`.
pub fn connection_eval<T: Real>(
    beta: &ConnectionForm<T>,
    w: &TotalSpacePoint<T>,
    v: &TangentVector<T>,
) -> Result<T> {
    match (beta.kind, w, v) {
        (
            BundleKind::Trivial { dim },
            TotalSpacePoint::Trivial { base, .. },
            TangentVector::Trivial { base: vb, fiber },
        ) if base.len() == dim && vb.len() == dim => Ok(*fiber + beta.tau.eval(base, vb)),
        (BundleKind::Sphere(b), TotalSpacePoint::Sphere { frame, level }, TangentVector::Sphere(xi))
            if *level == b.level =>
        {
            let vertical = T::from_int(b.level.factor()) * b.sign::<T>() * xi.z / T::two_pi();
            if beta.tau.is_zero() {
                return Ok(vertical);
            }
            let p = frame.base();
            let push = frame.apply(&xi.cross(&Vector3::z()));
            let x = DVector::from_column_slice(p.vector().as_slice());
            let u = DVector::from_column_slice(push.as_slice());
            Ok(vertical + beta.tau.eval(&x, &u))
        }
        _ => Err(MaslovError::WrongBundle),
    }
}

/// `∫_γ f` for a sampled loop in a total space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaslovDataResult<T: Real> {
    pub value: T,
    pub samples: usize,
    /// Largest structural-scale step between consecutive samples.
    pub max_step: f64,
}

/// Per-interval increment in the total space: its size (for the sampling
/// guard) and `∫ f` along the chord when no tangents are supplied.
fn chord<T: Real>(
    beta: &ConnectionForm<T>,
    a: &TotalSpacePoint<T>,
    b: &TotalSpacePoint<T>,
) -> Result<(f64, T)> {
    match (beta.kind, a, b) {
        (
            BundleKind::Trivial { dim },
            TotalSpacePoint::Trivial { base: xa, fiber: fa },
            TotalSpacePoint::Trivial { base: xb, fiber: fb },
        ) if xa.len() == dim && xb.len() == dim => {
            let dtheta = fb.div(fa).arg() / T::two_pi();
            Ok((dtheta.abs().as_f64(), dtheta + beta.tau.integrate_segment(xa, xb)))
        }
        (
            BundleKind::Sphere(bundle),
            TotalSpacePoint::Sphere { frame: wa, level: la },
            TotalSpacePoint::Sphere { frame: wb, level: lb },
        ) if *la == bundle.level && *lb == bundle.level => {
            let wb = nearest_rep(wa, wb, *la);
            let xi = wa.inverse().mul(&wb).log();
            let mid = wa.mul(&SO3Element::exp(&(xi * T::lit(0.5))));
            let f = connection_eval(beta, &TotalSpacePoint::Sphere { frame: mid, level: *la }, &TangentVector::Sphere(xi))?;
            // turns of the structural circle swept by a body step of this size
            let size = xi.norm() / bundle.turn_angle::<T>().abs();
            Ok((size.as_f64(), f))
        }
        _ => Err(MaslovError::WrongBundle),
    }
}

/// `∫_γ f`. With tangents the composite trapezoid rule is used; without,
/// each interval is integrated along the chord (a straight segment in the
/// base and the short fiber arc, or a one-parameter subgroup in SO(3)).
pub fn maslov_data<T: Real>(
    l: &SampledLoop<TotalSpacePoint<T>>,
    beta: &ConnectionForm<T>,
    tangents: Option<&[TangentVector<T>]>,
) -> Result<MaslovDataResult<T>> {
    let vals = l.values();
    let mut max_step = 0.0f64;
    let mut chord_sum = T::zero();
    for (k, w) in vals.windows(2).enumerate() {
        let (size, integral) = chord(beta, &w[0], &w[1])?;
        if !(size < FIBER_STEP_GUARD) {
            return Err(MaslovError::UndersampledLoop { index: k, gap: size });
        }
        max_step = max_step.max(size);
        chord_sum += integral;
    }
    let value = match tangents {
        None => chord_sum,
        Some(ts) => {
            if ts.len() != vals.len() {
                return Err(MaslovError::InvalidLoop(format!(
                    "{} tangents for {} samples",
                    ts.len(),
                    vals.len()
                )));
            }
            let fs = vals
                .iter()
                .zip(ts)
                .map(|(w, v)| connection_eval(beta, w, v))
                .collect::<Result<Vec<T>>>()?;
            let half = T::lit(0.5);
            l.times().windows(2).zip(fs.windows(2)).fold(T::zero(), |acc, (t, f)| {
                acc + T::lit(t[1] - t[0]) * (f[0] + f[1]) * half
            })
        }
    };
    Ok(MaslovDataResult { value, samples: vals.len(), max_step })
}

/// `Ω(u, v)` at a base point.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureSample<T: Real> {
    pub base_point: DVector<T>,
    pub u: DVector<T>,
    pub v: DVector<T>,
    pub value: T,
}

/// `Ω(u, v)` with `π*Ω = df`.
///
/// On `ℝ²ⁿ` this is `dτ` by central differences; on the sphere bundles it is
/// `r·ω` plus `dσ`, with `r` from the structure equation.
pub fn curvature<T: Real>(
    beta: &ConnectionForm<T>,
    base_point: &DVector<T>,
    u: &DVector<T>,
    v: &DVector<T>,
) -> Result<T> {
    match beta.kind {
        BundleKind::Trivial { dim } => {
            if base_point.len() != dim || u.len() != dim || v.len() != dim {
                return Err(MaslovError::InvalidDimension(format!(
                    "curvature on R^{dim} needs {dim}-vectors"
                )));
            }
            Ok(beta.tau.exterior_derivative(base_point, u, v))
        }
        BundleKind::Sphere(b) => {
            if base_point.len() != 3 || u.len() != 3 || v.len() != 3 {
                return Err(MaslovError::InvalidDimension("sphere curvature needs 3-vectors".into()));
            }
            let p = SpherePoint::new(Vector3::from_column_slice(base_point.as_slice()))?;
            let u3 = Vector3::from_column_slice(u.as_slice());
            let v3 = Vector3::from_column_slice(v.as_slice());
            let w = omega_s2(&p, &u3, &v3)?;
            Ok(b.invariant_curvature_constant::<T>() * w
                + beta.tau.exterior_derivative(base_point, u, v))
        }
    }
}

/// [`curvature`] packaged with its arguments.
pub fn curvature_sample<T: Real>(
    beta: &ConnectionForm<T>,
    base_point: &DVector<T>,
    u: &DVector<T>,
    v: &DVector<T>,
) -> Result<CurvatureSample<T>> {
    let value = curvature(beta, base_point, u, v)?;
    Ok(CurvatureSample { base_point: base_point.clone(), u: u.clone(), v: v.clone(), value })
}

/// `∫ Ω` over the base.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacteristicNumber {
    pub value: f64,
    pub nearest: i64,
    pub residual: f64,
    /// Value from the half-resolution rule.
    pub coarse_value: f64,
}

/// `∫ Ω` over S² by product Gauss–Legendre quadrature; `0` over `ℝ²ⁿ`,
/// which is contractible.
pub fn characteristic_number<T: Real>(beta: &ConnectionForm<T>) -> Result<CharacteristicNumber> {
    match beta.kind {
        BundleKind::Trivial { .. } => {
            Ok(CharacteristicNumber { value: 0.0, nearest: 0, residual: 0.0, coarse_value: 0.0 })
        }
        BundleKind::Sphere(_) => {
            let (np, na) = SPHERE_RULE;
            let fine = integrate_curvature(beta, np, na)?.as_f64();
            let coarse = integrate_curvature(beta, np / 2, na / 2)?.as_f64();
            if !fine.is_finite() || (fine - coarse).abs() > CHARACTERISTIC_CONVERGENCE_TOL {
                return Err(MaslovError::IntegrationFailed(format!(
                    "curvature integral not converged: {fine} ({np}x{na}) vs {coarse}"
                )));
            }
            let nearest = fine.round();
            Ok(CharacteristicNumber {
                value: fine,
                nearest: nearest as i64,
                residual: (fine - nearest).abs(),
                coarse_value: coarse,
            })
        }
    }
}

fn integrate_curvature<T: Real>(beta: &ConnectionForm<T>, np: usize, na: usize) -> Result<T> {
    let rule = SphereRule::<T>::product(np, na);
    let mut acc = T::zero();
    for (p, w) in rule.points.iter().zip(&rule.weights) {
        let sp = SpherePoint::normalized(*p)?;
        let (e1, e2) = sp.tangent_basis();
        let x = DVector::from_column_slice(sp.vector().as_slice());
        let u = DVector::from_column_slice(e1.as_slice());
        let v = DVector::from_column_slice(e2.as_slice());
        acc += curvature(beta, &x, &u, &v)? * *w;
    }
    Ok(acc)
}

/// Phase of the horizontal lift of `base_loop` from `start`, relative to
/// `start`: `e^{2πi(c − ∮ s*f)}` for the lift `s` by minimal rotations
/// (constant fiber on `ℝ²ⁿ`) closing up with structural offset `c`.
pub fn holonomy<T: Real>(
    beta: &ConnectionForm<T>,
    base_loop: &SampledLoop<DVector<T>>,
    start: &TotalSpacePoint<T>,
    sign: HolonomySign,
) -> Result<Phase<T>> {
    let pts = base_loop.values();
    let gap = (start.base() - &pts[0]).norm();
    if gap > T::tol(1e-9) {
        return Err(MaslovError::InvalidInput(format!(
            "start point lies {:e} away from the loop's first base point",
            gap.as_f64()
        )));
    }
    let turns = match (beta.kind, start) {
        (BundleKind::Trivial { dim }, TotalSpacePoint::Trivial { .. }) => {
            if pts[0].len() != dim {
                return Err(MaslovError::WrongBundle);
            }
            -beta.tau.integrate_polyline(pts)
        }
        (BundleKind::Sphere(b), TotalSpacePoint::Sphere { frame, level }) if *level == b.level => {
            let (nodes, weights) = gauss_legendre::<T>(2);
            let mut w = *frame;
            let mut integral = T::zero();
            for (k, seg) in pts.windows(2).enumerate() {
                let a = Vector3::from_column_slice(seg[0].as_slice());
                let c = Vector3::from_column_slice(seg[1].as_slice());
                let step = SO3Element::minimal_rotation(&a, &c).ok_or_else(|| {
                    MaslovError::LiftFailed(format!("antipodal consecutive samples at {k}"))
                })?;
                let gen = step.log();
                for (x, wt) in nodes.iter().zip(&weights) {
                    let s = (*x + T::one()) * T::lit(0.5);
                    let ws = SO3Element::exp(&(gen * s)).mul(&w);
                    let body = ws.inverse().apply(&gen);
                    let f = connection_eval(
                        beta,
                        &TotalSpacePoint::Sphere { frame: ws, level: *level },
                        &TangentVector::Sphere(body),
                    )?;
                    integral += f * *wt * T::lit(0.5);
                }
                w = step.mul(&w);
            }
            let offset = b
                .fiber_offset(frame, &w)
                .map_err(|e| MaslovError::LiftFailed(e.to_string()))?;
            offset - integral
        }
        _ => return Err(MaslovError::WrongBundle),
    };
    let z = Phase::from_turns(turns);
    Ok(match sign {
        HolonomySign::Standard => z,
        HolonomySign::Flipped => z.conj(),
    })
}
