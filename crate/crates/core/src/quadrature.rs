//! Deterministic quadrature rules: Gauss–Legendre on [-1, 1], uniform
//! rules on the circle, and product rules on S² and SO(3).

use nalgebra::{Matrix3, Vector3};

use crate::scalar::Real;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [-1, 1].
///
/// Nodes are located by Newton iteration on the three-term Legendre
/// recurrence, seeded with the Chebyshev-like guess `cos(π(i + 3/4)/(n + 1/2))`.
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let pi = T::pi();
    let one = T::one();
    let two = T::lit(2.0);
    let nt = T::from_int(n as i64);
    for i in 0..n.div_ceil(2) {
        let mut x = (pi * (T::from_int(i as i64) + T::lit(0.75)) / (nt + T::lit(0.5))).cos();
        let mut dp = T::one();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= T::default_epsilon() * T::lit(4.0) {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != T::zero() {
            dp = d;
        }
        let w = two / ((one - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative<T: Real>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    if n == 0 {
        return (p0, T::zero());
    }
    for k in 2..=n {
        let kf = T::from_int(k as i64);
        let p2 = ((T::lit(2.0) * kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = T::from_int(n as i64);
    let dp = nf * (x * p1 - p0) / (x * x - T::one());
    (p1, dp)
}

/// Angles `2πk/n`, `k = 0..n`; each node carries weight `1/n`.
pub fn circle_angles<T: Real>(n: usize) -> Vec<T> {
    (0..n)
        .map(|k| T::two_pi() * T::from_int(k as i64) / T::from_int(n as i64))
        .collect()
}

/// A product rule on the unit sphere: Gauss–Legendre in `cos θ`, uniform in `φ`.
/// Weights sum to the sphere's area `4π`.
#[derive(Debug, Clone)]
pub struct SphereRule<T: Real> {
    pub points: Vec<Vector3<T>>,
    pub weights: Vec<T>,
}

impl<T: Real> SphereRule<T> {
    pub fn product(n_polar: usize, n_azimuth: usize) -> Self {
        let (zs, wz) = gauss_legendre::<T>(n_polar);
        let phis = circle_angles::<T>(n_azimuth);
        let dphi = T::two_pi() / T::from_int(n_azimuth as i64);
        let mut points = Vec::with_capacity(n_polar * n_azimuth);
        let mut weights = Vec::with_capacity(n_polar * n_azimuth);
        for (z, w) in zs.iter().zip(&wz) {
            let rho = (T::one() - *z * *z).max(T::zero()).sqrt();
            for phi in &phis {
                points.push(Vector3::new(rho * phi.cos(), rho * phi.sin(), *z));
                weights.push(*w * dphi);
            }
        }
        Self { points, weights }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Haar quadrature on SO(3) from a ZYZ Euler-angle product grid with
/// `n` nodes per angle. Weights sum to 1.
pub fn so3_rule<T: Real>(n: usize) -> (Vec<Matrix3<T>>, Vec<T>) {
    let (cos_betas, wb) = gauss_legendre::<T>(n);
    let angles = circle_angles::<T>(n);
    let norm = T::lit(2.0) * T::from_int((n * n) as i64);
    let mut mats = Vec::with_capacity(n * n * n);
    let mut weights = Vec::with_capacity(n * n * n);
    for a in &angles {
        for (cb, w) in cos_betas.iter().zip(&wb) {
            let beta = cb.acos();
            for g in &angles {
                mats.push(rot_z(*a) * rot_y(beta) * rot_z(*g));
                weights.push(*w / norm);
            }
        }
    }
    (mats, weights)
}

pub(crate) fn rot_z<T: Real>(angle: T) -> Matrix3<T> {
    let (s, c) = angle.sin_cos();
    Matrix3::new(c, -s, T::zero(), s, c, T::zero(), T::zero(), T::zero(), T::one())
}

pub(crate) fn rot_y<T: Real>(angle: T) -> Matrix3<T> {
    let (s, c) = angle.sin_cos();
    Matrix3::new(c, T::zero(), s, T::zero(), T::one(), T::zero(), -s, T::zero(), c)
}
