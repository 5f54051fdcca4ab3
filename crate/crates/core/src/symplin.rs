//! Dense linear symplectic algebra on ℝ²ⁿ: symplectic forms, metrics,
//! group-averaged metrics and the compatible complex structure
//! `J = 𝒜⁻¹ √(−𝒜²)`.
//!
//! A bilinear form with matrix `M` is evaluated as `uᵀ M v`. The standard
//! symplectic matrix is `Ω₀ = [[0, −I], [I, 0]]` in the coordinates
//! `(q, p)`, which equals the standard complex structure `J₀`; with this
//! convention `g_J(u, v) = ω(Ju, v)` is the Euclidean inner product for the
//! standard triple.

use nalgebra::{DMatrix, DVector, Matrix3, SymmetricEigen};

use crate::error::{MaslovError, Result};
use crate::quadrature::so3_rule;
use crate::scalar::Real;

/// Largest supported half-dimension.
pub const MAX_HALF_DIM: usize = 32;

/// Eigenvalue floor applied before taking square roots.
pub const SQRT_EIGEN_FLOOR: f64 = 1e-14;

/// Default node count of the circle quadrature used for group averaging.
pub const DEFAULT_CIRCLE_NODES: usize = 256;
/// Default nodes per factor for torus averaging.
pub const DEFAULT_TORUS_NODES: usize = 64;
/// Default nodes per Euler angle for SO(3) averaging.
pub const DEFAULT_SO3_NODES: usize = 16;

fn max_abs<T: Real>(m: &DMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, x| acc.max(x.abs()))
}

/// A constant symplectic form on ℝ²ⁿ.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticForm<T: Real> {
    n: usize,
    matrix: DMatrix<T>,
}

impl<T: Real> SymplecticForm<T> {
    pub fn new(matrix: DMatrix<T>) -> Result<Self> {
        let dim = matrix.nrows();
        if dim == 0 || dim != matrix.ncols() || !dim.is_multiple_of(2) {
            return Err(MaslovError::InvalidDimension(format!(
                "symplectic matrix must be square of even size, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if dim / 2 > MAX_HALF_DIM {
            return Err(MaslovError::InvalidDimension(format!(
                "half-dimension {} exceeds the cap {MAX_HALF_DIM}",
                dim / 2
            )));
        }
        let scale = max_abs(&matrix);
        if scale == T::zero() {
            return Err(MaslovError::InvalidInput("symplectic matrix is zero".into()));
        }
        let asym = max_abs(&(&matrix + matrix.transpose()));
        if asym > T::tol(1e-12) * scale {
            return Err(MaslovError::InvalidInput(format!(
                "symplectic matrix is not antisymmetric (defect {:e})",
                asym.as_f64()
            )));
        }
        let fro = matrix.norm() / T::from_int(dim as i64).sqrt();
        let det = (&matrix / fro).determinant();
        if det.abs() <= T::tol(1e-12) {
            return Err(MaslovError::InvalidInput(format!(
                "symplectic matrix is degenerate (scaled determinant {:e})",
                det.as_f64()
            )));
        }
        Ok(Self { n: dim / 2, matrix })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    pub fn eval(&self, u: &DVector<T>, v: &DVector<T>) -> T {
        u.dot(&(&self.matrix * v))
    }
}

/// The standard form `Ω₀ = [[0, −I], [I, 0]]` on ℝ²ⁿ.
pub fn standard_symplectic<T: Real>(n: usize) -> Result<SymplecticForm<T>> {
    if n == 0 || n > MAX_HALF_DIM {
        return Err(MaslovError::InvalidDimension(format!(
            "half-dimension must be in 1..={MAX_HALF_DIM}, got {n}"
        )));
    }
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        m[(i, n + i)] = -T::one();
        m[(n + i, i)] = T::one();
    }
    SymplecticForm::new(m)
}

/// A symmetric positive definite inner product.
#[derive(Debug, Clone, PartialEq)]
pub struct Metric<T: Real> {
    matrix: DMatrix<T>,
}

impl<T: Real> Metric<T> {
    pub fn new(matrix: DMatrix<T>) -> Result<Self> {
        let dim = matrix.nrows();
        if dim == 0 || dim != matrix.ncols() {
            return Err(MaslovError::InvalidDimension(format!(
                "metric must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let scale = max_abs(&matrix).max(T::one());
        let asym = max_abs(&(&matrix - matrix.transpose()));
        if asym > T::tol(1e-12) * scale {
            return Err(MaslovError::InvalidInput(format!(
                "metric is not symmetric (defect {:e})",
                asym.as_f64()
            )));
        }
        let min = SymmetricEigen::new(matrix.clone()).eigenvalues.min();
        if min <= T::zero() {
            return Err(MaslovError::NotPositiveDefinite { min_eigenvalue: min.as_f64() });
        }
        Ok(Self { matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self { matrix: DMatrix::identity(dim, dim) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    pub fn eval(&self, u: &DVector<T>, v: &DVector<T>) -> T {
        u.dot(&(&self.matrix * v))
    }
}

/// Symmetric square root of an SPD matrix by eigendecomposition.
///
/// Eigenvalues below [`SQRT_EIGEN_FLOOR`] are clamped to it; clearly negative
/// eigenvalues are rejected.
pub fn sqrt_spd<T: Real>(m: &DMatrix<T>) -> Result<DMatrix<T>> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(MaslovError::InvalidDimension("sqrt_spd needs a square matrix".into()));
    }
    let scale = max_abs(m).max(T::one());
    let asym = max_abs(&(m - m.transpose()));
    if asym > T::tol(1e-12) * scale {
        return Err(MaslovError::InvalidInput(format!(
            "matrix is not symmetric (defect {:e})",
            asym.as_f64()
        )));
    }
    let sym = (m + m.transpose()) * T::lit(0.5);
    let eig = SymmetricEigen::new(sym);
    let min = eig.eigenvalues.min();
    if min < -T::tol(1e-12) * scale {
        return Err(MaslovError::NotPositiveDefinite { min_eigenvalue: min.as_f64() });
    }
    let floor = T::lit(SQRT_EIGEN_FLOOR);
    let roots = eig.eigenvalues.map(|l| l.max(floor).sqrt());
    let q = &eig.eigenvectors;
    let root = q * DMatrix::from_diagonal(&roots) * q.transpose();
    Ok((&root + root.transpose()) * T::lit(0.5))
}

/// `(ω, g, J)` with `J` compatible with `ω`, plus a reference unitary basis.
#[derive(Debug, Clone, PartialEq)]
pub struct CompatibleTriple<T: Real> {
    omega: SymplecticForm<T>,
    g: Metric<T>,
    j: DMatrix<T>,
    /// Columns `b₁..b_n` such that `(b, Jb)` is `g_J`-orthonormal.
    unitary_basis: DMatrix<T>,
}

impl<T: Real> CompatibleTriple<T> {
    /// `(Ω₀, I, J₀)` on ℝ²ⁿ.
    pub fn standard(n: usize) -> Result<Self> {
        build_compatible_j(&standard_symplectic(n)?, &Metric::identity(2 * n))
    }

    pub fn n(&self) -> usize {
        self.omega.n()
    }

    pub fn dim(&self) -> usize {
        self.omega.dim()
    }

    pub fn omega(&self) -> &SymplecticForm<T> {
        &self.omega
    }

    pub fn g(&self) -> &Metric<T> {
        &self.g
    }

    pub fn j(&self) -> &DMatrix<T> {
        &self.j
    }

    /// Matrix of `g_J(u, v) = ω(Ju, v)`.
    pub fn metric_j(&self) -> DMatrix<T> {
        self.j.transpose() * self.omega.matrix()
    }

    pub fn g_j(&self, u: &DVector<T>, v: &DVector<T>) -> T {
        self.omega.eval(&(&self.j * u), v)
    }

    pub fn unitary_basis(&self) -> &DMatrix<T> {
        &self.unitary_basis
    }

    /// Invariant defects: `‖J² + I‖_F`, `‖JᵀΩJ − Ω‖_F / ‖Ω‖_F`,
    /// asymmetry of `g_J`, and its smallest eigenvalue.
    pub fn invariant_defects(&self) -> (T, T, T, T) {
        let dim = self.dim();
        let id = DMatrix::<T>::identity(dim, dim);
        let j2 = (&self.j * &self.j + &id).norm();
        let om = self.omega.matrix();
        let pres = (self.j.transpose() * om * &self.j - om).norm() / om.norm();
        let gj = self.metric_j();
        let asym = (&gj - gj.transpose()).norm();
        let sym = (&gj + gj.transpose()) * T::lit(0.5);
        let min = SymmetricEigen::new(sym).eigenvalues.min();
        (j2, pres, asym, min)
    }
}

/// `𝒜` with `ω(u, ·) = g(𝒜u, ·)`, i.e. `𝒜 = −G⁻¹Ω`.
pub fn solve_a<T: Real>(omega: &SymplecticForm<T>, g: &Metric<T>) -> Result<DMatrix<T>> {
    let ginv = g
        .matrix()
        .clone()
        .try_inverse()
        .ok_or_else(|| MaslovError::CompatibleStructureFailed("metric is singular".into()))?;
    Ok(-(ginv * omega.matrix()))
}

/// Builds `J = 𝒜⁻¹ √(−𝒜²)` from `ω` and `g`.
///
/// The square root is the `g`-self-adjoint positive root, computed in
/// `g`-orthonormal coordinates where `−𝒜²` is an ordinary SPD matrix.
pub fn build_compatible_j<T: Real>(
    omega: &SymplecticForm<T>,
    g: &Metric<T>,
) -> Result<CompatibleTriple<T>> {
    let dim = omega.dim();
    if g.dim() != dim {
        return Err(MaslovError::InvalidDimension(format!(
            "metric is {}-dimensional, symplectic form is {dim}-dimensional",
            g.dim()
        )));
    }
    let s = sqrt_spd(g.matrix())?;
    let s_inv = s
        .clone()
        .try_inverse()
        .ok_or_else(|| MaslovError::CompatibleStructureFailed("metric root is singular".into()))?;
    // 𝒜' = S 𝒜 S⁻¹ = −S⁻¹ Ω S⁻¹ is antisymmetric, so −𝒜'² = 𝒜'ᵀ𝒜'.
    let a_prime = -(&s_inv * omega.matrix() * &s_inv);
    let neg_a2 = a_prime.transpose() * &a_prime;
    let b = sqrt_spd(&neg_a2).map_err(|e| {
        MaslovError::CompatibleStructureFailed(format!("sqrt(-A^2) failed: {e}"))
    })?;
    let a_inv = a_prime.clone().try_inverse().ok_or_else(|| {
        MaslovError::CompatibleStructureFailed("A is singular".into())
    })?;
    let j = &s_inv * (a_inv * b) * &s;

    let eig = SymmetricEigen::new(g.matrix().clone()).eigenvalues;
    let cond = eig.max() / eig.min();
    let mut triple = CompatibleTriple {
        omega: omega.clone(),
        g: g.clone(),
        j,
        unitary_basis: DMatrix::zeros(dim, dim / 2),
    };
    let (j2, pres, asym, min) = triple.invariant_defects();
    let tol = T::tol(1e-10);
    if j2 > tol || pres > tol || asym > tol * triple.metric_j().norm() || min <= T::zero() {
        return Err(MaslovError::CompatibleStructureFailed(format!(
            "|J^2+I|={:e}, |J^T W J - W|={:e}, g_J asymmetry={:e}, min eig g_J={:e}, cond(g)={:e}",
            j2.as_f64(),
            pres.as_f64(),
            asym.as_f64(),
            min.as_f64(),
            cond.as_f64()
        )));
    }
    triple.unitary_basis = reference_unitary_basis(&triple)?;
    Ok(triple)
}

/// Complex Gram–Schmidt of the coordinate vectors in the Hermitian structure
/// `(g_J, J)`: returns `b₁..b_n` with `(b, Jb)` a `g_J`-orthonormal basis.
fn reference_unitary_basis<T: Real>(triple: &CompatibleTriple<T>) -> Result<DMatrix<T>> {
    let dim = triple.dim();
    let n = dim / 2;
    let gj = triple.metric_j();
    let gj = (&gj + gj.transpose()) * T::lit(0.5);
    let ip = |a: &DVector<T>, b: &DVector<T>| a.dot(&(&gj * b));
    let j = triple.j();
    let mut basis: Vec<DVector<T>> = Vec::with_capacity(n);
    for k in 0..dim {
        if basis.len() == n {
            break;
        }
        let mut c = DVector::from_fn(dim, |i, _| if i == k { T::one() } else { T::zero() });
        for _ in 0..2 {
            for b in &basis {
                let jb = j * b;
                c = &c - b * ip(b, &c) - &jb * ip(&jb, &c);
            }
        }
        let norm = ip(&c, &c).sqrt();
        if norm > T::tol(1e-8) {
            basis.push(c / norm);
        }
    }
    if basis.len() != n {
        return Err(MaslovError::CompatibleStructureFailed(
            "could not complete a unitary reference basis".into(),
        ));
    }
    Ok(DMatrix::from_columns(&basis))
}

/// The matrix of `zⱼ ↦ e^{2πi mⱼ t} zⱼ` with `zⱼ = qⱼ + i pⱼ`.
pub fn linear_action_matrix<T: Real>(weights: &[i64], t: T) -> DMatrix<T> {
    let n = weights.len();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for (j, &w) in weights.iter().enumerate() {
        let (s, c) = (T::two_pi() * T::from_int(w) * t).sin_cos();
        m[(j, j)] = c;
        m[(j, n + j)] = -s;
        m[(n + j, j)] = s;
        m[(n + j, n + j)] = c;
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupKind {
    CircleWeights,
    TorusWeights,
    So3,
}

/// Quadrature for the Haar measure of a compact group acting linearly.
#[derive(Debug, Clone)]
pub struct GroupSampler<T: Real> {
    kind: GroupKind,
    samples: Vec<DMatrix<T>>,
    weights: Vec<T>,
}

impl<T: Real> GroupSampler<T> {
    pub fn new(kind: GroupKind, samples: Vec<DMatrix<T>>, weights: Vec<T>) -> Result<Self> {
        if samples.is_empty() || samples.len() != weights.len() {
            return Err(MaslovError::InvalidInput(
                "sampler needs as many weights as samples, and at least one".into(),
            ));
        }
        if weights.iter().any(|w| *w < T::zero()) {
            return Err(MaslovError::InvalidInput("negative quadrature weight".into()));
        }
        let total = weights.iter().fold(T::zero(), |a, w| a + *w);
        if (total - T::one()).abs() > T::tol(1e-12) {
            return Err(MaslovError::InvalidInput(format!(
                "quadrature weights sum to {}, not 1",
                total.as_f64()
            )));
        }
        let dim = samples[0].nrows();
        for s in &samples {
            if s.nrows() != dim || s.ncols() != dim {
                return Err(MaslovError::InvalidDimension("sampler matrices differ in size".into()));
            }
            if s.determinant().abs() <= T::tol(1e-12) {
                return Err(MaslovError::InvalidInput("sampler element is not invertible".into()));
            }
        }
        Ok(Self { kind, samples, weights })
    }

    /// Uniform `nodes`-point quadrature of the circle acting with `weights`.
    pub fn circle(weights: &[i64], nodes: usize) -> Result<Self> {
        if weights.is_empty() || nodes == 0 {
            return Err(MaslovError::InvalidDimension("empty weights or zero nodes".into()));
        }
        let w = T::one() / T::from_int(nodes as i64);
        let samples = (0..nodes)
            .map(|k| {
                linear_action_matrix(weights, T::from_int(k as i64) / T::from_int(nodes as i64))
            })
            .collect();
        Self::new(GroupKind::CircleWeights, samples, vec![w; nodes])
    }

    /// Product of uniform circle rules, one factor per weight row.
    pub fn torus(rows: &[Vec<i64>], nodes_per_factor: usize) -> Result<Self> {
        let n = rows.first().map(Vec::len).unwrap_or(0);
        if n == 0 || rows.iter().any(|r| r.len() != n) || nodes_per_factor == 0 {
            return Err(MaslovError::InvalidDimension(
                "torus weight rows must be nonempty and of equal length".into(),
            ));
        }
        let mut samples = vec![DMatrix::<T>::identity(2 * n, 2 * n)];
        for row in rows {
            let factor: Vec<DMatrix<T>> = (0..nodes_per_factor)
                .map(|k| {
                    linear_action_matrix(
                        row,
                        T::from_int(k as i64) / T::from_int(nodes_per_factor as i64),
                    )
                })
                .collect();
            samples = samples
                .iter()
                .flat_map(|s| factor.iter().map(move |f| s * f))
                .collect();
        }
        let w = T::one() / T::from_int(samples.len() as i64);
        let count = samples.len();
        Self::new(GroupKind::TorusWeights, samples, vec![w; count])
    }

    /// Euler-angle product rule on SO(3) acting on ℝ³.
    pub fn so3(nodes_per_angle: usize) -> Result<Self> {
        if nodes_per_angle == 0 {
            return Err(MaslovError::InvalidDimension("zero nodes".into()));
        }
        let (mats, weights) = so3_rule::<T>(nodes_per_angle);
        let samples = mats.iter().map(|m: &Matrix3<T>| DMatrix::from_column_slice(3, 3, m.as_slice())).collect();
        Self::new(GroupKind::So3, samples, weights)
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn samples(&self) -> &[DMatrix<T>] {
        &self.samples
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.samples[0].nrows()
    }
}

/// `ḡ = Σₖ wₖ AₖᵀgAₖ`.
pub fn average_metric<T: Real>(g: &Metric<T>, sampler: &GroupSampler<T>) -> Result<Metric<T>> {
    if g.dim() != sampler.dim() {
        return Err(MaslovError::InvalidDimension(format!(
            "metric is {}-dimensional, sampler acts on dimension {}",
            g.dim(),
            sampler.dim()
        )));
    }
    let dim = g.dim();
    let mut acc = DMatrix::<T>::zeros(dim, dim);
    for (a, w) in sampler.samples.iter().zip(&sampler.weights) {
        acc += (a.transpose() * g.matrix() * a) * *w;
    }
    let acc = (&acc + acc.transpose()) * T::lit(0.5);
    Metric::new(acc).map_err(|e| MaslovError::AveragingFailed(e.to_string()))
}
