//! Truncated matrix Laurent series in the loop parameter λ.
//!
//! A [`LoopMatrix`] stores the Fourier coefficients of a 2×2 loop over the
//! degree window `[-N, N]`. Elements of the twisted loop group have diagonal
//! entries in even degrees and off-diagonal entries in odd degrees; every
//! operation here preserves that parity exactly.

use nalgebra::Matrix2;
use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;
pub type Mat2 = Matrix2<C64>;

/// Default truncation order `N` of the degree window `[-N, N]`.
pub const DEFAULT_TRUNCATION: usize = 24;

/// Inversion refuses loops whose determinant has drifted further than this from 1.
pub const DET_DRIFT_LIMIT: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LoopError {
    #[error("determinant drifted from 1 by {residual:e}; truncation order too small?")]
    DetDrift { residual: f64 },
    #[error("truncation orders differ ({0} vs {1})")]
    OrderMismatch(usize, usize),
}

/// Real 2×2 matrix as a complex [`Mat2`].
pub fn mat2(a: f64, b: f64, c: f64, d: f64) -> Mat2 {
    Mat2::new(C64::new(a, 0.0), C64::new(b, 0.0), C64::new(c, 0.0), C64::new(d, 0.0))
}

pub fn identity2() -> Mat2 {
    Mat2::identity()
}

/// `[[d, -b], [-c, a]]`; the inverse when the determinant is 1.
pub fn adjugate2(m: &Mat2) -> Mat2 {
    Mat2::new(m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)])
}

/// Largest entry modulus.
pub fn max_abs2(m: &Mat2) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

fn frobenius2(m: &Mat2) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn is_zero2(m: &Mat2) -> bool {
    m.iter().all(|z| z.re == 0.0 && z.im == 0.0)
}

/// Diagnostics from [`LoopMatrix::check_structure`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructureReport {
    /// Largest entry that the σ-twisting forces to vanish.
    pub parity_violation: f64,
    /// Largest imaginary part (only measured for real-form loops).
    pub max_imag: f64,
    /// `max |det γ(λ) - 1|` over λ = ±1.
    pub det_residual: f64,
}

/// A 2×2 loop truncated to the degree window `[-N, N]`.
#[derive(Clone, Debug, PartialEq)]
pub struct LoopMatrix {
    order: usize,
    coeffs: Vec<Mat2>,
    tail_mass: f64,
}

impl LoopMatrix {
    pub fn zero(order: usize) -> Self {
        Self { order, coeffs: vec![Mat2::zeros(); 2 * order + 1], tail_mass: 0.0 }
    }

    pub fn identity(order: usize) -> Self {
        Self::constant(order, identity2())
    }

    pub fn constant(order: usize, m: Mat2) -> Self {
        let mut out = Self::zero(order);
        out.coeffs[order] = m;
        out
    }

    /// Builds a loop from `(degree, coefficient)` terms; repeated degrees add up.
    /// Terms outside the window are dropped into the tail mass.
    pub fn from_terms(order: usize, terms: &[(i32, Mat2)]) -> Self {
        let mut out = Self::zero(order);
        for &(k, m) in terms {
            match out.index(k) {
                Some(i) => out.coeffs[i] += m,
                None => out.tail_mass += frobenius2(&m),
            }
        }
        out
    }

    /// The middle term `ω_k` of the small cell `P^k`:
    /// `diag(λ^k, λ^-k)` for even `k`, `[[0, λ^k], [-λ^-k, 0]]` for odd `k`.
    pub fn omega(order: usize, k: i32) -> Self {
        let one = C64::new(1.0, 0.0);
        let mut upper = Mat2::zeros();
        let mut lower = Mat2::zeros();
        if k % 2 == 0 {
            upper[(0, 0)] = one;
            lower[(1, 1)] = one;
        } else {
            upper[(0, 1)] = one;
            lower[(1, 0)] = -one;
        }
        Self::from_terms(order, &[(k, upper), (-k, lower)])
    }

    /// `ω_k⁻¹`: `ω_{-k}` for even `k`, `-ω_k` for odd `k`.
    pub fn omega_inverse(order: usize, k: i32) -> Self {
        if k % 2 == 0 {
            Self::omega(order, -k)
        } else {
            Self::omega(order, k).scale(-1.0)
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn with_tail_mass(mut self, tail: f64) -> Self {
        self.tail_mass = tail;
        self
    }

    fn index(&self, k: i32) -> Option<usize> {
        let i = k + self.order as i32;
        (i >= 0 && i <= 2 * self.order as i32).then_some(i as usize)
    }

    /// Coefficient of `λ^k`; zero outside the window.
    pub fn coeff(&self, k: i32) -> Mat2 {
        self.index(k).map_or_else(Mat2::zeros, |i| self.coeffs[i])
    }

    pub fn coeff_mut(&mut self, k: i32) -> Option<&mut Mat2> {
        self.index(k).map(move |i| &mut self.coeffs[i])
    }

    /// `(degree, coefficient)` pairs with non-zero coefficient.
    pub fn terms(&self) -> impl Iterator<Item = (i32, &Mat2)> + '_ {
        let n = self.order as i32;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, m)| !is_zero2(m))
            .map(move |(i, m)| (i as i32 - n, m))
    }

    pub fn min_degree(&self) -> Option<i32> {
        self.terms().map(|(k, _)| k).next()
    }

    pub fn max_degree(&self) -> Option<i32> {
        self.terms().map(|(k, _)| k).last()
    }

    /// Largest entry modulus over all coefficients.
    pub fn norm_inf(&self) -> f64 {
        self.coeffs.iter().map(max_abs2).fold(0.0, f64::max)
    }

    /// `Σ_k ‖c_k‖_F`, an upper bound for the operator norm on the unit circle.
    pub fn norm_sum(&self) -> f64 {
        self.coeffs.iter().map(frobenius2).sum()
    }

    /// Coefficient-wise ∞-distance.
    pub fn max_diff(&self, other: &LoopMatrix) -> f64 {
        let n = self.order.max(other.order) as i32;
        (-n..=n)
            .map(|k| max_abs2(&(self.coeff(k) - other.coeff(k))))
            .fold(0.0, f64::max)
    }

    pub fn scale(&self, s: f64) -> LoopMatrix {
        LoopMatrix {
            order: self.order,
            coeffs: self.coeffs.iter().map(|m| m * C64::new(s, 0.0)).collect(),
            tail_mass: self.tail_mass * s.abs(),
        }
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, other: &LoopMatrix, s: f64) -> LoopMatrix {
        debug_assert_eq!(self.order, other.order);
        let sc = C64::new(s, 0.0);
        LoopMatrix {
            order: self.order,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b * sc).collect(),
            tail_mass: self.tail_mass + s.abs() * other.tail_mass,
        }
    }

    /// Cauchy product truncated to `[-N, N]`. Dropped terms are added to the
    /// tail mass together with the operands' own tails.
    pub fn multiply(&self, other: &LoopMatrix) -> LoopMatrix {
        let n = self.order as i32;
        let mut out = LoopMatrix::zero(self.order);
        let lhs: Vec<(i32, Mat2)> = self.terms().map(|(k, m)| (k, *m)).collect();
        let rhs: Vec<(i32, Mat2)> = other.terms().map(|(k, m)| (k, *m)).collect();
        let mut dropped = 0.0;
        for (ka, a) in &lhs {
            for (kb, b) in &rhs {
                let k = ka + kb;
                if k.abs() <= n {
                    out.coeffs[(k + n) as usize] += a * b;
                } else {
                    dropped += frobenius2(&(a * b));
                }
            }
        }
        out.tail_mass = dropped
            + self.tail_mass * other.norm_sum()
            + other.tail_mass * self.norm_sum()
            + self.tail_mass * other.tail_mass;
        out
    }

    /// Right multiplication by a sparse loop-algebra element.
    pub fn multiply_field(&self, field: &LoopVectorField) -> LoopMatrix {
        let n = self.order as i32;
        let mut out = LoopMatrix::zero(self.order);
        let mut dropped = 0.0;
        for (ka, a) in self.terms() {
            for (kb, b) in field.terms() {
                let k = ka + kb;
                if k.abs() <= n {
                    out.coeffs[(k + n) as usize] += a * b;
                } else {
                    dropped += frobenius2(&(a * b));
                }
            }
        }
        out.tail_mass = dropped + self.tail_mass * field.norm_sum();
        out
    }

    /// Left multiplication by a λ-independent matrix.
    pub fn premultiply_const(&self, m: &Mat2) -> LoopMatrix {
        LoopMatrix {
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| m * c).collect(),
            tail_mass: self.tail_mass * frobenius2(m),
        }
    }

    /// Right multiplication by a λ-independent matrix.
    pub fn postmultiply_const(&self, m: &Mat2) -> LoopMatrix {
        LoopMatrix {
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| c * m).collect(),
            tail_mass: self.tail_mass * frobenius2(m),
        }
    }

    /// `m γ m⁻¹` for a constant matrix `m` of determinant 1.
    pub fn conjugate_const(&self, m: &Mat2) -> LoopMatrix {
        let inv = adjugate2(m);
        self.premultiply_const(m).postmultiply_const(&inv)
    }

    /// Coefficient-wise adjugate `[[d, -b], [-c, a]]`.
    pub fn adjugate(&self) -> LoopMatrix {
        LoopMatrix {
            order: self.order,
            coeffs: self.coeffs.iter().map(adjugate2).collect(),
            tail_mass: self.tail_mass,
        }
    }

    /// Inverse via the adjugate; exact when `det ≡ 1`.
    pub fn inverse(&self) -> Result<LoopMatrix, LoopError> {
        let residual = self.det_residual();
        if !(residual <= DET_DRIFT_LIMIT) {
            return Err(LoopError::DetDrift { residual });
        }
        Ok(self.adjugate().with_tail_mass(self.tail_mass + residual))
    }

    pub fn eval(&self, lambda: C64) -> Mat2 {
        self.eval_and_dlambda(lambda).0
    }

    /// Value and λ-derivative at `lambda` (Horner on the truncated series).
    pub fn eval_and_dlambda(&self, lambda: C64) -> (Mat2, Mat2) {
        let n = self.order as i32;
        // Σ_{k=-N}^{N} c_k λ^k = λ^{-N} Σ_{i=0}^{2N} c_i λ^i
        let mut p = Mat2::zeros();
        let mut dp = Mat2::zeros();
        for c in self.coeffs.iter().rev() {
            dp = dp * lambda + p;
            p = p * lambda + c;
        }
        let shift = lambda.powi(-n);
        let value = p * shift;
        let deriv = dp * shift - p * (C64::new(n as f64, 0.0) * lambda.powi(-n - 1));
        (value, deriv)
    }

    /// Value and λ-derivative at a real `lambda`.
    pub fn eval_real(&self, lambda: f64) -> (Mat2, Mat2) {
        self.eval_and_dlambda(C64::new(lambda, 0.0))
    }

    /// `max |det γ(λ) - 1|` over λ = ±1.
    pub fn det_residual(&self) -> f64 {
        [1.0, -1.0]
            .into_iter()
            .map(|l| (self.eval(C64::new(l, 0.0)).determinant() - C64::new(1.0, 0.0)).norm())
            .fold(0.0, f64::max)
    }

    pub fn check_structure(&self, real_form: bool) -> StructureReport {
        let mut parity = 0.0_f64;
        let mut imag = 0.0_f64;
        for (k, m) in self.terms() {
            let forbidden = if k.rem_euclid(2) == 0 {
                [m[(0, 1)], m[(1, 0)]]
            } else {
                [m[(0, 0)], m[(1, 1)]]
            };
            parity = parity.max(forbidden[0].norm()).max(forbidden[1].norm());
            if real_form {
                imag = m.iter().fold(imag, |acc, z| acc.max(z.im.abs()));
            }
        }
        StructureReport { parity_violation: parity, max_imag: imag, det_residual: self.det_residual() }
    }

    /// Part with degrees `>= 0`.
    pub fn nonnegative_part(&self) -> LoopMatrix {
        let mut out = self.clone();
        for k in -(self.order as i32)..0 {
            *out.coeff_mut(k).unwrap() = Mat2::zeros();
        }
        out
    }

    /// Part with degrees `<= 0`.
    pub fn nonpositive_part(&self) -> LoopMatrix {
        let mut out = self.clone();
        for k in 1..=(self.order as i32) {
            *out.coeff_mut(k).unwrap() = Mat2::zeros();
        }
        out
    }
}

/// A sparse loop-algebra element `Σ A_k λ^k` with trace-free coefficients,
/// used for potentials and Maurer–Cartan forms.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct LoopVectorField {
    terms: Vec<(i32, Mat2)>,
}

impl LoopVectorField {
    /// Terms with equal degree are merged; zero coefficients are dropped.
    pub fn from_terms(terms: impl IntoIterator<Item = (i32, Mat2)>) -> Self {
        let mut merged: Vec<(i32, Mat2)> = Vec::new();
        for (k, m) in terms {
            match merged.iter_mut().find(|(d, _)| *d == k) {
                Some((_, acc)) => *acc += m,
                None => merged.push((k, m)),
            }
        }
        merged.retain(|(_, m)| !is_zero2(m));
        merged.sort_by_key(|(k, _)| *k);
        Self { terms: merged }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, &Mat2)> + '_ {
        self.terms.iter().map(|(k, m)| (*k, m))
    }

    pub fn coeff(&self, k: i32) -> Mat2 {
        self.terms.iter().find(|(d, _)| *d == k).map_or_else(Mat2::zeros, |(_, m)| *m)
    }

    pub fn norm_inf(&self) -> f64 {
        self.terms.iter().map(|(_, m)| max_abs2(m)).fold(0.0, f64::max)
    }

    pub fn norm_sum(&self) -> f64 {
        self.terms.iter().map(|(_, m)| frobenius2(m)).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_terms(self.terms.iter().map(|(k, m)| (*k, m * C64::new(s, 0.0))))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_terms(self.terms.iter().chain(other.terms.iter()).copied())
    }

    /// `ω_k A ω_k⁻¹`, computed exactly on the sparse terms.
    pub fn conjugate_by_omega(&self, k: i32) -> Self {
        let order = k.unsigned_abs() as usize;
        let omega = LoopMatrix::omega(order, k);
        let omega_inv = LoopMatrix::omega_inverse(order, k);
        let mut out = Vec::new();
        for (d, m) in self.terms() {
            for (ka, a) in omega.terms() {
                for (kb, b) in omega_inv.terms() {
                    out.push((ka + d + kb, a * m * b));
                }
            }
        }
        Self::from_terms(out)
    }

    /// Value `Σ A_k λ^k`.
    pub fn eval(&self, lambda: C64) -> Mat2 {
        self.terms.iter().fold(Mat2::zeros(), |acc, (k, m)| acc + m * lambda.powi(*k))
    }

    /// Largest trace and parity violations over all coefficients.
    pub fn check(&self) -> (f64, f64) {
        let mut trace = 0.0_f64;
        let mut parity = 0.0_f64;
        for (k, m) in self.terms() {
            trace = trace.max(m.trace().norm());
            let forbidden = if k.rem_euclid(2) == 0 {
                m[(0, 1)].norm().max(m[(1, 0)].norm())
            } else {
                m[(0, 0)].norm().max(m[(1, 1)].norm())
            };
            parity = parity.max(forbidden);
        }
        (trace, parity)
    }

    pub fn to_loop(&self, order: usize) -> LoopMatrix {
        LoopMatrix::from_terms(order, &self.terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const N: usize = DEFAULT_TRUNCATION;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn identity_times_identity() {
        let i = LoopMatrix::identity(N);
        assert_eq!(i.multiply(&i), i);
    }

    #[test]
    fn omega_one_squares_to_minus_identity() {
        let w1 = LoopMatrix::omega(N, 1);
        assert!(w1.multiply(&w1).max_diff(&LoopMatrix::identity(N).scale(-1.0)) == 0.0);
    }

    #[test]
    fn omega_one_times_omega_minus_one() {
        let prod = LoopMatrix::omega(N, 1).multiply(&LoopMatrix::omega(N, -1));
        assert_eq!(prod.max_diff(&LoopMatrix::omega(N, 2).scale(-1.0)), 0.0);
    }

    #[test]
    fn inverse_of_omega_one() {
        let inv = LoopMatrix::omega(N, 1).inverse().unwrap();
        let expected =
            LoopMatrix::from_terms(N, &[(1, mat2(0.0, -1.0, 0.0, 0.0)), (-1, mat2(0.0, 0.0, 1.0, 0.0))]);
        assert_eq!(inv.max_diff(&expected), 0.0);
        assert_eq!(LoopMatrix::identity(N).inverse().unwrap(), LoopMatrix::identity(N));
    }

    #[test]
    fn inverse_rejects_det_drift() {
        let m = LoopMatrix::constant(N, mat2(2.0, 0.0, 0.0, 1.0));
        assert!(matches!(m.inverse(), Err(LoopError::DetDrift { .. })));
    }

    #[test]
    fn eval_and_dlambda_monomials() {
        let (v, d) = LoopMatrix::identity(N).eval_real(1.0);
        assert_eq!(v, identity2());
        assert_eq!(d, Mat2::zeros());
        let (v, d) = LoopMatrix::omega(N, 1).eval_real(1.0);
        assert_eq!(v, mat2(0.0, 1.0, -1.0, 0.0));
        assert_eq!(d, mat2(0.0, 1.0, 1.0, 0.0));
    }

    #[test]
    fn structure_of_basic_loops() {
        let r = LoopMatrix::identity(N).check_structure(true);
        assert_eq!((r.parity_violation, r.max_imag, r.det_residual), (0.0, 0.0, 0.0));
        let r = LoopMatrix::omega(N, 1).check_structure(true);
        assert_eq!((r.parity_violation, r.max_imag), (0.0, 0.0));
        assert!(r.det_residual < 1e-15);
    }

    #[test]
    fn injected_parity_violation_is_reported() {
        let mut m = LoopMatrix::identity(N);
        *m.coeff_mut(2).unwrap() = mat2(0.0, 1e-3, 0.0, 0.0);
        let r = m.check_structure(true);
        assert!((r.parity_violation - 1e-3).abs() < 1e-18);
    }

    #[test]
    fn truncation_goes_to_tail() {
        let a = LoopMatrix::from_terms(2, &[(2, mat2(1.0, 0.0, 0.0, 1.0))]);
        let p = a.multiply(&a);
        assert_eq!(p.norm_inf(), 0.0);
        assert!((p.tail_mass() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn conjugating_by_omega_matches_loop_product() {
        let field = LoopVectorField::from_terms([
            (1, mat2(0.0, 0.3, -1.2, 0.0)),
            (0, mat2(0.5, 0.0, 0.0, -0.5)),
            (-1, mat2(0.0, 2.0, 0.7, 0.0)),
        ]);
        for k in [-2, -1, 1, 2] {
            let direct = LoopMatrix::omega(N, k)
                .multiply(&field.to_loop(N))
                .multiply(&LoopMatrix::omega(N, k).inverse().unwrap());
            let sparse = field.conjugate_by_omega(k).to_loop(N);
            assert!(direct.max_diff(&sparse) < 1e-15, "k = {k}");
        }
    }

    #[test]
    fn vector_field_checks() {
        let good = LoopVectorField::from_terms([(1, mat2(0.0, 1.0, 1.0, 0.0))]);
        assert_eq!(good.check(), (0.0, 0.0));
        let bad = LoopVectorField::from_terms([(1, mat2(1.0, 0.0, 0.0, 1.0))]);
        let (trace, parity) = bad.check();
        assert_eq!(trace, 2.0);
        assert_eq!(parity, 1.0);
        assert_eq!(good.eval(c(2.0)), mat2(0.0, 2.0, 2.0, 0.0));
    }
}
