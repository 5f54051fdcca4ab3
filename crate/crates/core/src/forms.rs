//! Closed-form 1-forms on ℝᵈ used as connection data, section phases and
//! gauge perturbations.
//!
//! Coordinates on ℝ²ⁿ are ordered `(q₁, …, q_n, p₁, …, p_n)`.

use nalgebra::DVector;

use crate::error::{MaslovError, Result};
use crate::scalar::Real;

/// Step for central differences of form coefficients.
pub const FD_STEP: f64 = 1e-5;

/// `coefficient · Π xᵢ^{exponents[i]}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial<T: Real> {
    pub coefficient: T,
    pub exponents: Vec<u32>,
}

impl<T: Real> Monomial<T> {
    pub fn new(coefficient: T, exponents: Vec<u32>) -> Self {
        Self { coefficient, exponents }
    }

    pub fn eval(&self, x: &DVector<T>) -> T {
        self.exponents
            .iter()
            .enumerate()
            .fold(self.coefficient, |acc, (i, &e)| acc * x[i].powi(e as i32))
    }

    /// ∂/∂xᵢ, evaluated.
    pub fn partial(&self, i: usize, x: &DVector<T>) -> T {
        let e = self.exponents.get(i).copied().unwrap_or(0);
        if e == 0 {
            return T::zero();
        }
        let mut acc = self.coefficient * T::from_int(e as i64);
        for (k, &ek) in self.exponents.iter().enumerate() {
            let p = if k == i { ek - 1 } else { ek };
            acc *= x[k].powi(p as i32);
        }
        acc
    }
}

/// A real polynomial on ℝᵈ.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial<T: Real> {
    pub dim: usize,
    pub terms: Vec<Monomial<T>>,
}

impl<T: Real> Polynomial<T> {
    pub fn new(dim: usize, terms: Vec<Monomial<T>>) -> Result<Self> {
        if let Some(bad) = terms.iter().find(|t| t.exponents.len() != dim) {
            return Err(MaslovError::InvalidDimension(format!(
                "monomial has {} exponents, polynomial dimension is {dim}",
                bad.exponents.len()
            )));
        }
        Ok(Self { dim, terms })
    }

    pub fn eval(&self, x: &DVector<T>) -> T {
        self.terms.iter().fold(T::zero(), |acc, t| acc + t.eval(x))
    }

    pub fn gradient(&self, x: &DVector<T>) -> DVector<T> {
        DVector::from_fn(self.dim, |i, _| {
            self.terms.iter().fold(T::zero(), |acc, t| acc + t.partial(i, x))
        })
    }
}

/// A 1-form on ℝᵈ.
#[derive(Debug, Clone, PartialEq)]
#[derive(Default)]
pub enum OneForm<T: Real> {
    #[default]
    Zero,
    /// `scale · ½ Σⱼ (qⱼ dpⱼ − pⱼ dqⱼ)` on ℝ²ⁿ; `d` of it is `scale · Σ dqⱼ∧dpⱼ`.
    Liouville { scale: T },
    /// `Σᵢ Pᵢ dxᵢ` with polynomial coefficients.
    Components(Vec<Polynomial<T>>),
    /// `dF` for a polynomial `F`.
    Exact(Polynomial<T>),
    Sum(Vec<OneForm<T>>),
}


impl<T: Real> OneForm<T> {
    pub fn liouville(scale: T) -> Self {
        OneForm::Liouville { scale }
    }

    pub fn exact(potential: Polynomial<T>) -> Self {
        OneForm::Exact(potential)
    }

    pub fn is_zero(&self) -> bool {
        match self {
            OneForm::Zero => true,
            OneForm::Sum(parts) => parts.iter().all(OneForm::is_zero),
            _ => false,
        }
    }

    /// `self + other`, flattening nested sums.
    pub fn plus(self, other: OneForm<T>) -> Self {
        match (self, other) {
            (OneForm::Zero, b) => b,
            (a, OneForm::Zero) => a,
            (OneForm::Sum(mut a), OneForm::Sum(b)) => {
                a.extend(b);
                OneForm::Sum(a)
            }
            (OneForm::Sum(mut a), b) => {
                a.push(b);
                OneForm::Sum(a)
            }
            (a, b) => OneForm::Sum(vec![a, b]),
        }
    }

    /// Checks that the form can be evaluated on ℝ^`dim`.
    pub fn check_dim(&self, dim: usize) -> Result<()> {
        match self {
            OneForm::Zero => Ok(()),
            OneForm::Liouville { .. } if dim.is_multiple_of(2) => Ok(()),
            OneForm::Liouville { .. } => Err(MaslovError::InvalidDimension(format!(
                "Liouville form needs an even dimension, got {dim}"
            ))),
            OneForm::Components(ps) => {
                if ps.len() != dim || ps.iter().any(|p| p.dim != dim) {
                    Err(MaslovError::InvalidDimension(format!(
                        "component form does not live on R^{dim}"
                    )))
                } else {
                    Ok(())
                }
            }
            OneForm::Exact(p) if p.dim == dim => Ok(()),
            OneForm::Exact(p) => Err(MaslovError::InvalidDimension(format!(
                "exact form lives on R^{}, expected R^{dim}",
                p.dim
            ))),
            OneForm::Sum(parts) => parts.iter().try_for_each(|p| p.check_dim(dim)),
        }
    }

    /// The coefficient vector `A(x)` with `form_x(v) = A(x)·v`.
    pub fn coefficients(&self, x: &DVector<T>) -> DVector<T> {
        let d = x.len();
        match self {
            OneForm::Zero => DVector::zeros(d),
            OneForm::Liouville { scale } => {
                let n = d / 2;
                let half = *scale * T::lit(0.5);
                DVector::from_fn(d, |i, _| {
                    if i < n {
                        -half * x[n + i]
                    } else {
                        half * x[i - n]
                    }
                })
            }
            OneForm::Components(ps) => DVector::from_fn(d, |i, _| ps[i].eval(x)),
            OneForm::Exact(p) => p.gradient(x),
            OneForm::Sum(parts) => parts
                .iter()
                .fold(DVector::zeros(d), |acc, p| acc + p.coefficients(x)),
        }
    }

    pub fn eval(&self, x: &DVector<T>, v: &DVector<T>) -> T {
        if self.is_zero() {
            return T::zero();
        }
        self.coefficients(x).dot(v)
    }

    /// `dτ(u, v)` at `x` by central differences of the coefficients
    /// (step [`FD_STEP`]), for constant vector fields `u`, `v`.
    pub fn exterior_derivative(&self, x: &DVector<T>, u: &DVector<T>, v: &DVector<T>) -> T {
        if self.is_zero() {
            return T::zero();
        }
        let h = T::lit(FD_STEP);
        let two_h = h + h;
        let du = (self.coefficients(&(x + u * h)) - self.coefficients(&(x - u * h))) / two_h;
        let dv = (self.coefficients(&(x + v * h)) - self.coefficients(&(x - v * h))) / two_h;
        du.dot(v) - dv.dot(u)
    }

    /// `dτ(u, v)` where a closed form is known without differencing.
    pub fn exterior_derivative_exact(
        &self,
        x: &DVector<T>,
        u: &DVector<T>,
        v: &DVector<T>,
    ) -> Option<T> {
        match self {
            OneForm::Zero | OneForm::Exact(_) => Some(T::zero()),
            OneForm::Liouville { scale } => {
                let n = x.len() / 2;
                let s = (0..n).fold(T::zero(), |acc, j| acc + u[j] * v[n + j] - u[n + j] * v[j]);
                Some(*scale * s)
            }
            OneForm::Components(_) => None,
            OneForm::Sum(parts) => parts.iter().try_fold(T::zero(), |acc, p| {
                p.exterior_derivative_exact(x, u, v).map(|d| acc + d)
            }),
        }
    }

    /// Whether the form is exact by construction (a gradient or zero).
    pub fn is_exact_by_construction(&self) -> bool {
        match self {
            OneForm::Zero | OneForm::Exact(_) => true,
            OneForm::Sum(parts) => parts.iter().all(OneForm::is_exact_by_construction),
            _ => false,
        }
    }

    /// ∫ along the straight chord from `a` to `b`: potential differences for
    /// exact parts, midpoint rule otherwise (exact for the Liouville form).
    pub fn integrate_segment(&self, a: &DVector<T>, b: &DVector<T>) -> T {
        match self {
            OneForm::Zero => T::zero(),
            OneForm::Exact(p) => p.eval(b) - p.eval(a),
            OneForm::Sum(parts) => parts
                .iter()
                .fold(T::zero(), |acc, p| acc + p.integrate_segment(a, b)),
            _ => {
                let mid = (a + b) * T::lit(0.5);
                self.eval(&mid, &(b - a))
            }
        }
    }

    /// ∫ of the form along the polyline through `points`.
    pub fn integrate_polyline(&self, points: &[DVector<T>]) -> T {
        points
            .windows(2)
            .fold(T::zero(), |acc, w| acc + self.integrate_segment(&w[0], &w[1]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    #[test]
    fn liouville_evaluation_and_derivative() {
        let tau = OneForm::liouville(1.0);
        // ½(q dp − p dq) at (q,p)=(1,2) on ∂q gives −1
        assert!((tau.eval(&v(&[1.0, 2.0]), &v(&[1.0, 0.0])) + 1.0).abs() < 1e-15);
        let d = tau.exterior_derivative(&v(&[0.3, -0.7]), &v(&[1.0, 0.0]), &v(&[0.0, 1.0]));
        assert!((d - 1.0).abs() < 1e-9);
        let exact = tau
            .exterior_derivative_exact(&v(&[0.3, -0.7]), &v(&[1.0, 0.0]), &v(&[0.0, 1.0]))
            .unwrap();
        assert_eq!(exact, 1.0);
    }

    #[test]
    fn p_dq_component_form() {
        // τ = p dq on ℝ²
        let p_coeff = Polynomial::new(2, vec![Monomial::new(1.0, vec![0, 1])]).unwrap();
        let zero = Polynomial::new(2, vec![]).unwrap();
        let tau = OneForm::Components(vec![p_coeff, zero]);
        assert_eq!(tau.eval(&v(&[1.0, 2.0]), &v(&[1.0, 0.0])), 2.0);
        // d(p dq) = dp∧dq, so dτ(∂q, ∂p) = −1
        let d = tau.exterior_derivative(&v(&[1.0, 2.0]), &v(&[1.0, 0.0]), &v(&[0.0, 1.0]));
        assert!((d + 1.0).abs() < 1e-9);
    }

    #[test]
    fn exact_forms_are_closed_and_integrate_to_zero_on_loops() {
        let f = Polynomial::new(
            2,
            vec![
                Monomial::new(0.7, vec![2, 1]),
                Monomial::new(-1.3, vec![0, 3]),
                Monomial::new(0.4, vec![1, 1]),
            ],
        )
        .unwrap();
        let tau = OneForm::exact(f);
        let d = tau.exterior_derivative(&v(&[0.4, -0.9]), &v(&[0.6, 0.8]), &v(&[-0.8, 0.6]));
        assert!(d.abs() < 1e-8);
        let pts: Vec<_> = (0..=400)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / 400.0;
                v(&[1.0 + 0.5 * t.cos(), 0.5 * t.sin()])
            })
            .collect();
        assert!(tau.integrate_polyline(&pts).abs() < 1e-12);
    }

    #[test]
    fn dimension_checks() {
        assert!(OneForm::<f64>::liouville(1.0).check_dim(3).is_err());
        assert!(OneForm::<f64>::liouville(1.0).check_dim(4).is_ok());
        let f = Polynomial::new(3, vec![Monomial::new(1.0, vec![1, 0, 0])]).unwrap();
        assert!(OneForm::exact(f).check_dim(2).is_err());
        assert!(Polynomial::new(2, vec![Monomial::new(1.0, vec![1])]).is_err());
    }
}
