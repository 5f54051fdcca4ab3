//! Lagrangian frames, unitary frames, the `det²` map to the circle and the
//! phase-unwrapping loop-degree engine.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{MaslovError, Result};
use crate::forms::OneForm;
use crate::scalar::Real;
use crate::symplin::{standard_symplectic, CompatibleTriple, SymplecticForm};

/// Per-step argument increments at or above this are rejected.
pub const UNWRAP_GUARD: f64 = std::f64::consts::FRAC_PI_2;
/// Largest accepted distance of a degree from the nearest integer.
pub const MAX_DEGREE_RESIDUAL: f64 = 0.25;
/// Closure tolerance between the first and last loop samples.
pub const CLOSURE_TOL: f64 = 1e-8;
/// Smallest number of intervals in a sampled loop.
pub const MIN_LOOP_INTERVALS: usize = 8;

pub(crate) fn modulus<T: Real>(z: Complex<T>) -> T {
    z.norm_sqr().sqrt()
}

/// A unit complex number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phase<T: Real> {
    z: Complex<T>,
}

impl<T: Real> Phase<T> {
    pub fn new(z: Complex<T>) -> Result<Self> {
        let dev = (modulus(z) - T::one()).abs();
        if dev > T::tol(1e-12) {
            return Err(MaslovError::InvalidInput(format!(
                "phase modulus deviates from 1 by {:e}",
                dev.as_f64()
            )));
        }
        Ok(Self { z })
    }

    /// Projects a nonzero complex number to the circle.
    pub fn normalized(z: Complex<T>) -> Result<Self> {
        let r = modulus(z);
        if r <= T::default_epsilon() {
            return Err(MaslovError::InvalidInput("cannot normalize a zero phase".into()));
        }
        Ok(Self { z: z / r })
    }

    pub fn one() -> Self {
        Self { z: Complex::new(T::one(), T::zero()) }
    }

    /// `e^{iθ}`.
    pub fn from_angle(theta: T) -> Self {
        let (s, c) = theta.sin_cos();
        Self { z: Complex::new(c, s) }
    }

    /// `e^{2πiθ}`.
    pub fn from_turns(theta: T) -> Self {
        Self::from_angle(T::two_pi() * theta)
    }

    pub fn value(&self) -> Complex<T> {
        self.z
    }

    /// Principal argument in (−π, π].
    pub fn arg(&self) -> T {
        self.z.im.atan2(self.z.re)
    }

    pub fn conj(&self) -> Self {
        Self { z: self.z.conj() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self { z: self.z * other.z }
    }

    pub fn div(&self, other: &Self) -> Self {
        Self { z: self.z * other.z.conj() }
    }

    pub fn distance(&self, other: &Self) -> T {
        modulus(self.z - other.z)
    }
}

/// Payloads that can be stored in a [`SampledLoop`].
pub trait LoopPayload<T: Real> {
    fn loop_distance(&self, other: &Self) -> T;
}

impl<T: Real> LoopPayload<T> for Phase<T> {
    fn loop_distance(&self, other: &Self) -> T {
        self.distance(other)
    }
}

impl<T: Real> LoopPayload<T> for DVector<T> {
    fn loop_distance(&self, other: &Self) -> T {
        if self.len() != other.len() {
            return T::max_value().unwrap_or_else(T::one);
        }
        (self - other).norm()
    }
}

/// Samples of a closed curve at increasing times `0 = t₀ < … < t_N = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledLoop<P> {
    times: Vec<f64>,
    values: Vec<P>,
}

impl<P> SampledLoop<P> {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[P] {
        &self.values
    }

    /// Number of intervals `N`.
    pub fn intervals(&self) -> usize {
        self.values.len() - 1
    }

    pub fn map<Q>(&self, f: impl FnMut(&P) -> Q) -> SampledLoop<Q> {
        SampledLoop { times: self.times.clone(), values: self.values.iter().map(f).collect() }
    }

    pub fn try_map<Q>(&self, f: impl FnMut(&P) -> Result<Q>) -> Result<SampledLoop<Q>> {
        let values = self.values.iter().map(f).collect::<Result<Vec<_>>>()?;
        Ok(SampledLoop { times: self.times.clone(), values })
    }
}

impl<P> SampledLoop<P> {
    /// Validates times and closure.
    pub fn new<T: Real>(times: Vec<f64>, values: Vec<P>) -> Result<Self>
    where
        P: LoopPayload<T>,
    {
        if times.len() != values.len() {
            return Err(MaslovError::InvalidLoop(format!(
                "{} times but {} values",
                times.len(),
                values.len()
            )));
        }
        if values.len() < MIN_LOOP_INTERVALS + 1 {
            return Err(MaslovError::InvalidLoop(format!(
                "a loop needs at least {} samples, got {}",
                MIN_LOOP_INTERVALS + 1,
                values.len()
            )));
        }
        if times[0] != 0.0 || *times.last().unwrap() != 1.0 {
            return Err(MaslovError::InvalidLoop("times must start at 0 and end at 1".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(MaslovError::InvalidLoop("times must be strictly increasing".into()));
        }
        let gap = values[0].loop_distance(values.last().unwrap()).as_f64();
        if !(gap < CLOSURE_TOL) {
            return Err(MaslovError::InvalidLoop(format!("loop is not closed (gap {gap:e})")));
        }
        Ok(Self { times, values })
    }

    /// Samples `f` at `t = k/N`, `k = 0..=N`.
    pub fn uniform<T: Real>(intervals: usize, mut f: impl FnMut(f64) -> P) -> Result<Self>
    where
        P: LoopPayload<T>,
    {
        let times: Vec<f64> = (0..=intervals).map(|k| k as f64 / intervals as f64).collect();
        let values = times.iter().map(|&t| f(t)).collect();
        Self::new(times, values)
    }

    /// Fallible variant of [`SampledLoop::uniform`].
    pub fn try_uniform<T: Real>(
        intervals: usize,
        mut f: impl FnMut(f64) -> Result<P>,
    ) -> Result<Self>
    where
        P: LoopPayload<T>,
    {
        let times: Vec<f64> = (0..=intervals).map(|k| k as f64 / intervals as f64).collect();
        let values = times.iter().map(|&t| f(t)).collect::<Result<Vec<_>>>()?;
        Self::new(times, values)
    }
}

/// `a` followed by `b`, reparametrized onto `[0, ½]` and `[½, 1]`.
pub fn concat<T: Real, P: LoopPayload<T> + Clone>(
    a: &SampledLoop<P>,
    b: &SampledLoop<P>,
) -> Result<SampledLoop<P>> {
    let gap = a.values[0].loop_distance(&b.values[0]).as_f64();
    if !(gap < CLOSURE_TOL) {
        return Err(MaslovError::InvalidLoop(format!(
            "loops do not share a basepoint (gap {gap:e})"
        )));
    }
    let mut times: Vec<f64> = a.times.iter().map(|t| 0.5 * t).collect();
    let mut values = a.values.clone();
    times.pop();
    values.pop();
    times.extend(b.times.iter().map(|t| 0.5 + 0.5 * t));
    values.extend(b.values.iter().cloned());
    SampledLoop::new(times, values)
}

/// An `n`-dimensional isotropic subspace of ℝ²ⁿ, stored by a basis.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianFrame<T: Real> {
    columns: DMatrix<T>,
}

impl<T: Real> LagrangianFrame<T> {
    /// Lagrangian for the standard form.
    pub fn new(columns: DMatrix<T>) -> Result<Self> {
        if columns.nrows() == 0 || columns.nrows() != 2 * columns.ncols() {
            return Err(MaslovError::InvalidDimension(format!(
                "frame must be 2n x n, got {}x{}",
                columns.nrows(),
                columns.ncols()
            )));
        }
        let omega = standard_symplectic(columns.ncols())?;
        Self::with_form(columns, &omega)
    }

    /// Lagrangian for `omega`.
    pub fn with_form(columns: DMatrix<T>, omega: &SymplecticForm<T>) -> Result<Self> {
        if columns.nrows() != omega.dim() || columns.ncols() != omega.n() {
            return Err(MaslovError::InvalidDimension(format!(
                "frame is {}x{}, expected {}x{}",
                columns.nrows(),
                columns.ncols(),
                omega.dim(),
                omega.n()
            )));
        }
        let sv = columns.clone().singular_values();
        let (smin, smax) = (sv.min(), sv.max());
        if smin <= T::tol(1e-10) * smax.max(T::one()) {
            return Err(MaslovError::DegenerateFrame { min_singular: smin.as_f64() });
        }
        let defect = isotropy_defect(&columns, omega);
        if defect > T::tol(1e-10) {
            return Err(MaslovError::NotLagrangian { defect: defect.as_f64() });
        }
        Ok(Self { columns })
    }

    /// `[I; 0]`.
    pub fn horizontal(n: usize) -> Result<Self> {
        Self::new(DMatrix::identity(2 * n, n))
    }

    /// `[0; I]`.
    pub fn vertical(n: usize) -> Result<Self> {
        let mut c = DMatrix::zeros(2 * n, n);
        for i in 0..n {
            c[(n + i, i)] = T::one();
        }
        Self::new(c)
    }

    pub fn n(&self) -> usize {
        self.columns.ncols()
    }

    pub fn columns(&self) -> &DMatrix<T> {
        &self.columns
    }

    /// Euclidean orthogonal projector onto the plane.
    pub fn projector(&self) -> DMatrix<T> {
        let f = &self.columns;
        let gram = f.transpose() * f;
        let inv = gram.try_inverse().expect("frame has full rank");
        f * inv * f.transpose()
    }

    /// Projector distance between the spanned planes.
    pub fn plane_distance(&self, other: &Self) -> T {
        if self.columns.shape() != other.columns.shape() {
            return T::max_value().unwrap_or_else(T::one);
        }
        (self.projector() - other.projector()).norm()
    }

    pub fn same_plane(&self, other: &Self) -> bool {
        self.plane_distance(other) < T::tol(1e-9)
    }

    /// The image plane under a linear map.
    pub fn transformed(&self, a: &DMatrix<T>, omega: &SymplecticForm<T>) -> Result<Self> {
        Self::with_form(a * &self.columns, omega)
    }
}

impl<T: Real> LoopPayload<T> for LagrangianFrame<T> {
    fn loop_distance(&self, other: &Self) -> T {
        self.plane_distance(other)
    }
}

/// `max |ω(fᵢ, fⱼ)|` over column pairs normalized to unit length.
fn isotropy_defect<T: Real>(columns: &DMatrix<T>, omega: &SymplecticForm<T>) -> T {
    let mut f = columns.clone();
    for mut c in f.column_iter_mut() {
        let n = c.norm();
        c /= n;
    }
    let w = f.transpose() * omega.matrix() * &f;
    let scale = omega.matrix().iter().fold(T::zero(), |a, x| a.max(x.abs()));
    w.iter().fold(T::zero(), |a, x| a.max(x.abs())) / scale
}

/// An `n×n` complex unitary matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryFrame<T: Real> {
    u: DMatrix<Complex<T>>,
}

impl<T: Real> UnitaryFrame<T> {
    pub fn new(u: DMatrix<Complex<T>>) -> Result<Self> {
        if u.nrows() != u.ncols() || u.nrows() == 0 {
            return Err(MaslovError::InvalidDimension("unitary frame must be square".into()));
        }
        let defect = unitarity_defect(&u);
        if defect > T::tol(1e-10) {
            return Err(MaslovError::InvalidInput(format!(
                "matrix is not unitary (defect {:e})",
                defect.as_f64()
            )));
        }
        Ok(Self { u })
    }

    /// `diag(e^{iθ₁}, …)`.
    pub fn diagonal_phases(angles: &[T]) -> Self {
        let n = angles.len();
        let mut u = DMatrix::from_element(n, n, Complex::new(T::zero(), T::zero()));
        for (i, a) in angles.iter().enumerate() {
            u[(i, i)] = Phase::from_angle(*a).value();
        }
        Self { u }
    }

    pub fn matrix(&self) -> &DMatrix<Complex<T>> {
        &self.u
    }

    pub fn n(&self) -> usize {
        self.u.nrows()
    }

    /// `self · O` for a real orthogonal `O`.
    pub fn times_real(&self, o: &DMatrix<T>) -> Result<Self> {
        let oc = o.map(|x| Complex::new(x, T::zero()));
        Self::new(&self.u * oc)
    }
}

/// `‖U*U − I‖_F`.
pub fn unitarity_defect<T: Real>(u: &DMatrix<Complex<T>>) -> T {
    let n = u.ncols();
    let prod = u.adjoint() * u - DMatrix::<Complex<T>>::identity(n, n);
    prod.iter().fold(T::zero(), |a, z| a + z.norm_sqr()).sqrt()
}

/// The complex coordinates of a real vector in the triple's reference
/// unitary basis `b`, with `i` acting as `J`.
pub fn complex_coordinates<T: Real>(
    triple: &CompatibleTriple<T>,
    x: &DVector<T>,
) -> DVector<Complex<T>> {
    let gj = triple.metric_j();
    let b = triple.unitary_basis();
    let jb = triple.j() * b;
    let gx = &gj.transpose() * x;
    let re = b.transpose() * &gx;
    let im = jb.transpose() * &gx;
    DVector::from_fn(b.ncols(), |k, _| Complex::new(re[k], im[k]))
}

/// Orthonormalizes the frame in `g_J` and reads it as a unitary matrix.
pub fn unitary_of_frame<T: Real>(
    f: &LagrangianFrame<T>,
    triple: &CompatibleTriple<T>,
) -> Result<UnitaryFrame<T>> {
    let cols = f.columns();
    if cols.nrows() != triple.dim() || cols.ncols() != triple.n() {
        return Err(MaslovError::InvalidDimension(format!(
            "frame is {}x{}, triple acts on dimension {}",
            cols.nrows(),
            cols.ncols(),
            triple.dim()
        )));
    }
    let defect = isotropy_defect(cols, triple.omega());
    if defect > T::tol(1e-10) {
        return Err(MaslovError::NotLagrangian { defect: defect.as_f64() });
    }
    let gj = triple.metric_j();
    let gj = (&gj + gj.transpose()) * T::lit(0.5);
    let ip = |a: &DVector<T>, b: &DVector<T>| a.dot(&(&gj * b));
    let n = cols.ncols();
    let mut basis: Vec<DVector<T>> = Vec::with_capacity(n);
    for k in 0..n {
        let mut c: DVector<T> = cols.column(k).into_owned();
        let orig = ip(&c, &c).sqrt();
        for _ in 0..2 {
            for b in &basis {
                c = &c - b * ip(b, &c);
            }
        }
        let norm = ip(&c, &c).sqrt();
        if norm <= T::tol(1e-10) * orig {
            return Err(MaslovError::DegenerateFrame { min_singular: norm.as_f64() });
        }
        basis.push(c / norm);
    }
    let mut u = DMatrix::from_element(n, n, Complex::new(T::zero(), T::zero()));
    for (j, e) in basis.iter().enumerate() {
        u.set_column(j, &complex_coordinates(triple, e));
    }
    let defect = unitarity_defect(&u);
    if defect > T::tol(1e-10) {
        return Err(MaslovError::Internal(format!(
            "frame produced a non-unitary matrix (defect {:e})",
            defect.as_f64()
        )));
    }
    Ok(UnitaryFrame { u })
}

/// `(det U)²`.
pub fn det_squared<T: Real>(u: &UnitaryFrame<T>) -> Phase<T> {
    let d = u.u.clone().determinant();
    let d2 = d * d;
    let r = modulus(d2);
    Phase { z: d2 / r }
}

/// Winding number of a sampled loop of phases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegreeResult {
    /// Total unwrapped argument divided by `2π`.
    pub raw: f64,
    pub degree: i64,
    /// `|raw − degree|`.
    pub residual: f64,
    pub samples: usize,
    /// Largest single-step argument increment in radians.
    pub max_gap: f64,
}

/// Sums principal-branch argument increments around the loop.
pub fn loop_degree<T: Real>(l: &SampledLoop<Phase<T>>) -> Result<DegreeResult> {
    let mut total = 0.0f64;
    let mut max_gap = 0.0f64;
    for (k, w) in l.values().windows(2).enumerate() {
        let step = w[1].div(&w[0]).arg().as_f64();
        if !step.is_finite() {
            return Err(MaslovError::InvalidLoop(format!("non-finite phase at sample {k}")));
        }
        if step.abs() >= UNWRAP_GUARD {
            return Err(MaslovError::UndersampledLoop { index: k, gap: step.abs() });
        }
        max_gap = max_gap.max(step.abs());
        total += step;
    }
    let raw = total / std::f64::consts::TAU;
    let degree = raw.round();
    let residual = (raw - degree).abs();
    if residual >= MAX_DEGREE_RESIDUAL {
        return Err(MaslovError::AmbiguousDegree { raw, residual });
    }
    Ok(DegreeResult { raw, degree: degree as i64, residual, samples: l.values().len(), max_gap })
}

/// Maslov index of a loop of Lagrangian planes over a base loop.
///
/// Each `det²` phase is divided by the section phase `e^{2πi ∫₀ᵗ τ}`
/// accumulated along `base`; a `None` base is a constant point.
pub fn maslov_index<T: Real>(
    frames: &SampledLoop<LagrangianFrame<T>>,
    base: Option<&SampledLoop<DVector<T>>>,
    triple: &CompatibleTriple<T>,
    section_tau: &OneForm<T>,
) -> Result<DegreeResult> {
    section_tau.check_dim(triple.dim())?;
    let mut running = vec![T::zero(); frames.values().len()];
    if let Some(base) = base {
        if base.times() != frames.times() {
            return Err(MaslovError::InvalidLoop(
                "base loop and frame loop are sampled at different times".into(),
            ));
        }
        if base.values().iter().any(|x| x.len() != triple.dim()) {
            return Err(MaslovError::InvalidDimension("base points have the wrong size".into()));
        }
        let mut acc = T::zero();
        for (k, w) in base.values().windows(2).enumerate() {
            acc += section_tau.integrate_segment(&w[0], &w[1]);
            running[k + 1] = acc;
        }
    }
    let phases = frames
        .values()
        .iter()
        .zip(&running)
        .map(|(f, i)| {
            let u = unitary_of_frame(f, triple)?;
            Ok(det_squared(&u).div(&Phase::from_turns(*i)))
        })
        .collect::<Result<Vec<_>>>()?;
    // The corrected phase closes up to e^{−2πi∮τ}; the winding still reads
    // off the sum of increments, so closure is checked on the planes only.
    let loop_ = SampledLoop { times: frames.times().to_vec(), values: phases };
    loop_degree(&loop_)
}
