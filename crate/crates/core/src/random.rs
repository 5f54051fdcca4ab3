//! Seeded random inputs for property checks.

use nalgebra::{Complex, DMatrix, DVector, UnitQuaternion, Quaternion, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::forms::{Monomial, OneForm, Polynomial};
use crate::grassmann::{LagrangianFrame, UnitaryFrame};
use crate::scalar::Real;
use crate::sphere::{SO3Element, SpherePoint};
use crate::symplin::{Metric, SymplecticForm};

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal<T: Real, R: Rng + ?Sized>(rng: &mut R) -> T {
    let x: f64 = rng.sample(StandardNormal);
    T::lit(x)
}

pub fn uniform<T: Real, R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> T {
    T::lit(rng.random_range(lo..hi))
}

pub fn gaussian_vector<T: Real, R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DVector<T> {
    DVector::from_fn(dim, |_, _| normal(rng))
}

pub fn gaussian_matrix<T: Real, R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<T> {
    DMatrix::from_fn(rows, cols, |_, _| normal(rng))
}

/// Haar-distributed rotation from a normalized Gaussian quaternion.
pub fn random_so3<T: Real, R: Rng + ?Sized>(rng: &mut R) -> SO3Element<T> {
    let q = Quaternion::new(normal(rng), normal(rng), normal(rng), normal(rng));
    let m = UnitQuaternion::from_quaternion(q).to_rotation_matrix().into_inner();
    SO3Element::new(m).expect("unit quaternion gives a rotation")
}

pub fn random_sphere_point<T: Real, R: Rng + ?Sized>(rng: &mut R) -> SpherePoint<T> {
    loop {
        let v = Vector3::new(normal(rng), normal(rng), normal(rng));
        if v.norm() > T::lit(1e-3) {
            return SpherePoint::normalized(v).expect("nonzero");
        }
    }
}

/// A random unit tangent at `p`.
pub fn random_tangent<T: Real, R: Rng + ?Sized>(rng: &mut R, p: &SpherePoint<T>) -> Vector3<T> {
    let v = Vector3::new(normal(rng), normal(rng), normal(rng));
    let t = v - p.vector() * p.vector().dot(&v);
    let n = t.norm();
    if n > T::lit(1e-6) {
        t / n
    } else {
        p.tangent_basis().0
    }
}

/// `AᵀA + dim·I/4`: SPD with moderate conditioning.
pub fn random_spd<T: Real, R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Metric<T> {
    let a: DMatrix<T> = gaussian_matrix(rng, dim, dim);
    let m = a.transpose() * &a + DMatrix::identity(dim, dim) * T::lit(dim as f64 / 4.0);
    Metric::new((&m + m.transpose()) * T::lit(0.5)).expect("SPD by construction")
}

/// Haar-distributed real orthogonal matrix (QR of a Gaussian with signs fixed).
pub fn random_orthogonal<T: Real, R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<T> {
    let qr = gaussian_matrix::<T, R>(rng, n, n).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        if r[(j, j)] < T::zero() {
            let mut c = q.column_mut(j);
            c.neg_mut();
        }
    }
    q
}

/// Haar-distributed unitary matrix.
pub fn random_unitary<T: Real, R: Rng + ?Sized>(rng: &mut R, n: usize) -> UnitaryFrame<T> {
    let g = DMatrix::from_fn(n, n, |_, _| Complex::new(normal::<T, R>(rng), normal::<T, R>(rng)));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        let d = r[(j, j)];
        let m = d.norm_sqr().sqrt();
        if m > T::zero() {
            let ph = d / m;
            for z in q.column_mut(j).iter_mut() {
                *z *= ph;
            }
        }
    }
    UnitaryFrame::new(q).expect("QR factor is unitary")
}

/// A random Lagrangian plane for `omega`, built one vector at a time by
/// projecting Gaussian vectors onto the `ω`-complement of the span so far.
pub fn random_lagrangian<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    omega: &SymplecticForm<T>,
) -> Result<LagrangianFrame<T>> {
    let (dim, n) = (omega.dim(), omega.n());
    let mut cols: Vec<DVector<T>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut x: DVector<T> = gaussian_vector(rng, dim);
        if !cols.is_empty() {
            let e = DMatrix::from_columns(&cols);
            let a = e.transpose() * omega.matrix();
            let aat = &a * a.transpose();
            if let Some(inv) = aat.try_inverse() {
                x = &x - a.transpose() * (inv * (&a * &x));
            }
        }
        let norm = x.norm();
        if norm > T::lit(1e-3) {
            cols.push(x / norm);
        }
    }
    LagrangianFrame::with_form(DMatrix::from_columns(&cols), omega)
}

/// `dF` for a random polynomial `F` of degree ≤ `degree` with `terms` monomials.
pub fn random_exact_form<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    degree: u32,
    terms: usize,
) -> OneForm<T> {
    let monos = (0..terms)
        .map(|_| {
            let mut exps = vec![0u32; dim];
            let total = rng.random_range(1..=degree.max(1));
            for _ in 0..total {
                exps[rng.random_range(0..dim)] += 1;
            }
            Monomial::new(uniform(rng, -1.0, 1.0), exps)
        })
        .collect();
    OneForm::Exact(Polynomial::new(dim, monos).expect("exponent vectors have the right length"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grassmann::unitarity_defect;
    use crate::symplin::standard_symplectic;

    #[test]
    fn generators_satisfy_their_invariants() {
        let mut rng = seeded(7);
        for _ in 0..10 {
            let w = random_so3::<f64, _>(&mut rng);
            assert!((w.matrix().determinant() - 1.0).abs() < 1e-12);
            let o = random_orthogonal::<f64, _>(&mut rng, 4);
            assert!((o.transpose() * &o - DMatrix::identity(4, 4)).norm() < 1e-12);
            let u = random_unitary::<f64, _>(&mut rng, 3);
            assert!(unitarity_defect(u.matrix()) < 1e-12);
            let omega = standard_symplectic::<f64>(3).unwrap();
            assert!(random_lagrangian(&mut rng, &omega).is_ok());
        }
    }

    #[test]
    fn same_seed_same_stream() {
        let a: Vec<f64> = (0..5).map(|_| normal(&mut seeded(3))).collect();
        let b: Vec<f64> = (0..5).map(|_| normal(&mut seeded(3))).collect();
        assert_eq!(a, b);
    }
}
