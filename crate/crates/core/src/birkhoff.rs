//! Left-normalized Birkhoff factorization `Φ = Φ₋ Φ₊` with `Φ₋(∞) = I`,
//! detection of the small cells `P^k = G⁻ ω_k G⁺`, and the closed-form
//! factorizations of `ω_{±1} H₋` and `ω₂ H₋`.

use crate::loopalg::{adjugate2, identity2, max_abs2, LoopMatrix, Mat2, C64};
use crate::tolerances::Tolerances;
use nalgebra::{ComplexField, DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone)]
pub enum BirkhoffError {
    #[error("not on the big cell (condition {condition:e}, residual {residual:e})")]
    OffBigCell { condition: f64, residual: f64 },
    #[error("pivot vanishes: ω_{k}·H₋ lies on the small cell")]
    SmallCell {
        /// `L₋` with `ω_k H₋ = L₋ ω_k`.
        left: LoopMatrix,
        k: i32,
    },
    #[error("unsupported middle term ω_{0}")]
    UnsupportedShift(i32),
}

#[derive(Debug, Clone)]
pub struct BirkhoffFactors {
    /// Degrees `<= 0`, constant term `I`.
    pub minus: LoopMatrix,
    /// Degrees `>= 0`.
    pub plus: LoopMatrix,
    /// `‖minus·plus − Φ‖∞` over all coefficients.
    pub residual: f64,
    /// 1-norm condition number of the triangular factors of the least-squares systems.
    pub condition: f64,
}

impl BirkhoffFactors {
    /// `(2,1)` entry of the `λ⁻¹` coefficient of `minus`.
    pub fn c_minus1(&self) -> f64 {
        self.minus.coeff(-1)[(1, 0)].re
    }

    /// `(1,2)` entry of the `λ⁻¹` coefficient of `minus`.
    pub fn b_minus1(&self) -> f64 {
        self.minus.coeff(-1)[(0, 1)].re
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Stratum {
    BigCell,
    P1,
    Pm1,
    P2,
    Pm2,
    Deeper,
}

impl Stratum {
    /// Index `k` of the middle term, `0` for the big cell, `None` for deeper strata.
    pub fn index(self) -> Option<i32> {
        match self {
            Stratum::BigCell => Some(0),
            Stratum::P1 => Some(1),
            Stratum::Pm1 => Some(-1),
            Stratum::P2 => Some(2),
            Stratum::Pm2 => Some(-2),
            Stratum::Deeper => None,
        }
    }

    pub fn from_index(k: i32) -> Self {
        match k {
            0 => Stratum::BigCell,
            1 => Stratum::P1,
            -1 => Stratum::Pm1,
            2 => Stratum::P2,
            -2 => Stratum::Pm2,
            _ => Stratum::Deeper,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Stratum::BigCell => "big",
            Stratum::P1 => "P1",
            Stratum::Pm1 => "P-1",
            Stratum::P2 => "P2",
            Stratum::Pm2 => "P-2",
            Stratum::Deeper => "deeper",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CellClass {
    pub stratum: Stratum,
    /// `c₋₁` of the minus factor of `ω_k⁻¹Φ` (of `Φ` itself on the big cell).
    pub c_minus1: f64,
    /// `b₋₁` of the same minus factor.
    pub b_minus1: f64,
}

impl CellClass {
    pub fn big_cell(factors: &BirkhoffFactors) -> Self {
        Self { stratum: Stratum::BigCell, c_minus1: factors.c_minus1(), b_minus1: factors.b_minus1() }
    }

    pub fn is_big_cell(&self) -> bool {
        self.stratum == Stratum::BigCell
    }
}

/// Column of the unknown in row `r` of `C_k`, forced by the twisting.
fn unknown_col(r: usize, k: i32) -> usize {
    if k.rem_euclid(2) == 1 {
        1 - r
    } else {
        r
    }
}

/// Least-squares solve of `a x = b` by Householder QR, with the 1-norm
/// condition number of the triangular factor.
fn solve_overdetermined<T>(a: DMatrix<T>, b: DVector<T>) -> Option<(Vec<T>, f64)>
where
    T: ComplexField<RealField = f64>,
{
    let qr = a.qr();
    let r = qr.r();
    let r_inv = r.clone().try_inverse()?;
    let norm1 = |m: &DMatrix<T>| {
        m.column_iter().map(|c| c.iter().map(|z| z.clone().modulus()).sum::<f64>()).fold(0.0, f64::max)
    };
    let cond = norm1(&r) * norm1(&r_inv);
    if !cond.is_finite() || cond * f64::EPSILON >= 1.0 {
        return None;
    }
    let x = r_inv * (qr.q().adjoint() * b);
    Some((x.iter().cloned().collect(), cond))
}

/// [`factor_left_with`] using the default tolerances.
pub fn factor_left(phi: &LoopMatrix) -> Result<BirkhoffFactors, BirkhoffError> {
    factor_left_with(phi, &Tolerances::default())
}

/// Writes `Φ₋⁻¹ = I + Σ_{k=1}^{N} C_k λ^{-k}` and requires the coefficients
/// of degrees `-1..-2N` of `Φ₋⁻¹Φ` to vanish. The twisting leaves one unknown
/// per row of each `C_k`, so the block Toeplitz system splits into two
/// `2N × N` scalar systems, solved in the least-squares sense by QR.
pub fn factor_left_with(phi: &LoopMatrix, tol: &Tolerances) -> Result<BirkhoffFactors, BirkhoffError> {
    let n = phi.order();
    let real = phi.check_structure(true).max_imag == 0.0;
    let mut rows: [Vec<C64>; 2] = [Vec::new(), Vec::new()];
    let mut condition = 0.0_f64;
    let off = BirkhoffError::OffBigCell { condition: f64::INFINITY, residual: f64::NAN };
    for (r, row) in rows.iter_mut().enumerate() {
        // equations for degrees -1..-2N of Φ₋⁻¹Φ; unknowns C_1..C_N
        let m = 2 * n;
        let entry = |jj: usize, kk: usize| {
            let j = -(jj as i32) - 1;
            let k = kk as i32 + 1;
            phi.coeff(j + k)[(unknown_col(r, k), unknown_col(r, j))]
        };
        let target = |jj: usize| {
            let j = -(jj as i32) - 1;
            -phi.coeff(j)[(r, unknown_col(r, j))]
        };
        let solved = if real {
            let a = DMatrix::<f64>::from_fn(m, n, |jj, kk| entry(jj, kk).re);
            let b = DVector::<f64>::from_fn(m, |jj, _| target(jj).re);
            solve_overdetermined(a, b).map(|(x, c)| (x.into_iter().map(|v| C64::new(v, 0.0)).collect(), c))
        } else {
            let a = DMatrix::<C64>::from_fn(m, n, entry);
            let b = DVector::<C64>::from_fn(m, |jj, _| target(jj));
            solve_overdetermined(a, b)
        };
        let (x, cond) = solved.ok_or_else(|| off.clone())?;
        condition = condition.max(cond);
        *row = x;
    }

    let mut minus_inv = LoopMatrix::identity(n);
    for kk in 0..n {
        let k = kk as i32 + 1;
        let c = minus_inv.coeff_mut(-k).expect("degree inside window");
        for (r, row) in rows.iter().enumerate() {
            c[(r, unknown_col(r, k))] = row[kk];
        }
    }
    let plus = minus_inv.multiply(phi).nonnegative_part();
    let minus = minus_inv.adjugate().with_tail_mass(minus_inv.tail_mass());
    let residual = minus.multiply(&plus).max_diff(phi);
    let scale = phi.norm_inf().max(1.0);
    if !(residual <= tol.birkhoff_residual * scale) || condition > tol.birkhoff_condition {
        return Err(BirkhoffError::OffBigCell { condition, residual });
    }
    Ok(BirkhoffFactors { minus, plus, residual, condition })
}

/// [`shifted_factor_with`] using the default tolerances.
pub fn shifted_factor(k: i32, phi: &LoopMatrix) -> Result<BirkhoffFactors, BirkhoffError> {
    shifted_factor_with(k, phi, &Tolerances::default())
}

/// Left-normalized factorization of `ω_k⁻¹ Φ`.
pub fn shifted_factor_with(k: i32, phi: &LoopMatrix, tol: &Tolerances) -> Result<BirkhoffFactors, BirkhoffError> {
    if !matches!(k, -2 | -1 | 1 | 2) {
        return Err(BirkhoffError::UnsupportedShift(k));
    }
    let shifted = LoopMatrix::omega_inverse(phi.order(), k).multiply(phi);
    factor_left_with(&shifted, tol)
}

/// Coefficients of the minus factor of `ω_k⁻¹Φ` that vanish exactly when `Φ ∈ P^k`.
fn small_cell_signature(k: i32, minus: &LoopMatrix) -> f64 {
    let (c1, c3) = (minus.coeff(-1), minus.coeff(-3));
    match k {
        1 => c1[(1, 0)].norm(),
        -1 => c1[(0, 1)].norm(),
        2 => c1[(0, 1)].norm().max(c3[(0, 1)].norm()),
        _ => c1[(1, 0)].norm().max(c3[(1, 0)].norm()),
    }
}

/// [`detect_cell_with`] using the default tolerances.
pub fn detect_cell(phi: &LoopMatrix) -> CellClass {
    detect_cell_with(phi, &Tolerances::default())
}

/// Big cell if `factor_left` succeeds, otherwise the first `k` in `1, -1, 2, -2`
/// for which `ω_k⁻¹Φ` factors with the small-cell signature.
pub fn detect_cell_with(phi: &LoopMatrix, tol: &Tolerances) -> CellClass {
    if let Ok(f) = factor_left_with(phi, tol) {
        return CellClass::big_cell(&f);
    }
    for k in [1, -1, 2, -2] {
        if let Ok(f) = shifted_factor_with(k, phi, tol) {
            if small_cell_signature(k, &f.minus) <= tol.small_cell_pivot {
                return CellClass { stratum: Stratum::from_index(k), c_minus1: f.c_minus1(), b_minus1: f.b_minus1() };
            }
        }
    }
    CellClass { stratum: Stratum::Deeper, c_minus1: f64::NAN, b_minus1: f64::NAN }
}

fn entry_loop(h: &LoopMatrix, i: usize, j: usize) -> LoopMatrix {
    let n = h.order() as i32;
    let mut out = LoopMatrix::zero(h.order());
    for k in -n..=n {
        out.coeff_mut(k).unwrap()[(0, 0)] = h.coeff(k)[(i, j)];
    }
    out
}

/// Scalar Laurent series as the `(0,0)` entry of a [`LoopMatrix`].
#[derive(Clone)]
struct Scalar(LoopMatrix);

impl Scalar {
    fn shift(&self, d: i32) -> Scalar {
        let n = self.0.order() as i32;
        let mut out = LoopMatrix::zero(self.0.order());
        for k in -n..=n {
            if let Some(c) = out.coeff_mut(k + d) {
                c[(0, 0)] = self.0.coeff(k)[(0, 0)];
            }
        }
        Scalar(out)
    }

    fn scale(&self, s: f64) -> Scalar {
        Scalar(self.0.scale(s))
    }

    fn add(&self, other: &Scalar) -> Scalar {
        Scalar(self.0.add_scaled(&other.0, 1.0))
    }

    fn at(&self, k: i32) -> f64 {
        self.0.coeff(k)[(0, 0)].re
    }
}

fn assemble(order: usize, entries: [&Scalar; 4]) -> LoopMatrix {
    let n = order as i32;
    let mut out = LoopMatrix::zero(order);
    for k in -n..=n {
        let c = out.coeff_mut(k).unwrap();
        for (idx, e) in entries.iter().enumerate() {
            c[(idx / 2, idx % 2)] = e.0.coeff(k)[(0, 0)];
        }
    }
    out
}

fn loop_with(order: usize, terms: &[(i32, Mat2)]) -> LoopMatrix {
    LoopMatrix::from_terms(order, terms)
}

fn finish(left: LoopMatrix, right: LoopMatrix, d: Mat2, phi: &LoopMatrix) -> BirkhoffFactors {
    let minus = left.postmultiply_const(&adjugate2(&d));
    let plus = right.premultiply_const(&d);
    let residual = minus.multiply(&plus).max_diff(phi);
    BirkhoffFactors { minus, plus, residual, condition: f64::NAN }
}

fn diag(a: f64, d: f64) -> Mat2 {
    Mat2::new(C64::new(a, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(d, 0.0))
}

/// [`switch_formula_with`] using the default tolerances.
pub fn switch_formula(k: i32, h_minus: &LoopMatrix) -> Result<BirkhoffFactors, BirkhoffError> {
    switch_formula_with(k, h_minus, &Tolerances::default())
}

/// Closed-form factorization of `ω_k H₋` for `k = ±1`, with `H₋ = [[a, b], [c, d]]`
/// supported in degrees `<= 0`. When the pivot (`c₋₁` for `k = 1`, `b₋₁` for
/// `k = -1`) vanishes the product lies on `P^k` and the error carries `L₋`
/// with `ω_k H₋ = L₋ ω_k`.
pub fn switch_formula_with(k: i32, h_minus: &LoopMatrix, tol: &Tolerances) -> Result<BirkhoffFactors, BirkhoffError> {
    let order = h_minus.order();
    let a = Scalar(entry_loop(h_minus, 0, 0));
    let b = Scalar(entry_loop(h_minus, 0, 1));
    let c = Scalar(entry_loop(h_minus, 1, 0));
    let d = Scalar(entry_loop(h_minus, 1, 1));
    let phi = LoopMatrix::omega(order, k).multiply(h_minus);
    match k {
        1 => {
            let c1 = c.at(-1);
            if c1.abs() <= tol.zero {
                let left = assemble(order, [&d, &c.shift(2).scale(-1.0), &b.shift(-2).scale(-1.0), &a]);
                return Err(BirkhoffError::SmallCell { left, k });
            }
            let u0 = d.at(0) / c1;
            let left = assemble(
                order,
                [
                    &c.shift(1),
                    &d.shift(1).add(&c.shift(2).scale(-u0)),
                    &a.shift(-1).scale(-1.0),
                    &a.scale(u0).add(&b.shift(-1).scale(-1.0)),
                ],
            );
            let right = loop_with(order, &[(0, identity2()), (1, upper(u0))]);
            Ok(finish(left, right, diag(c1, 1.0 / c1), &phi))
        }
        -1 => {
            let b1 = b.at(-1);
            if b1.abs() <= tol.zero {
                let left = assemble(order, [&d, &c.shift(-2).scale(-1.0), &b.shift(2).scale(-1.0), &a]);
                return Err(BirkhoffError::SmallCell { left, k });
            }
            let v0 = a.at(0) / b1;
            let left = assemble(
                order,
                [
                    &c.shift(-1).add(&d.scale(-v0)),
                    &d.shift(-1),
                    &a.shift(1).scale(-1.0).add(&b.shift(2).scale(v0)),
                    &b.shift(1).scale(-1.0),
                ],
            );
            let right = loop_with(order, &[(0, identity2()), (1, lower(v0))]);
            Ok(finish(left, right, diag(-1.0 / b1, -b1), &phi))
        }
        _ => Err(BirkhoffError::UnsupportedShift(k)),
    }
}

fn upper(x: f64) -> Mat2 {
    Mat2::new(C64::new(0.0, 0.0), C64::new(x, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0))
}

fn lower(x: f64) -> Mat2 {
    Mat2::new(C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(x, 0.0), C64::new(0.0, 0.0))
}

/// Plus factor `G₊` of `ω₂ H₋ = G₋ G₊`, normalized to `G₊(0) = I`, valid when
/// `b₋₁ ≠ 0` and `a₋₂b₋₁ − a₀b₋₃ ≠ 0`.
pub fn omega2_plus_factor(h_minus: &LoopMatrix) -> Option<LoopMatrix> {
    let at = |i: usize, j: usize, k: i32| h_minus.coeff(k)[(i, j)].re;
    let (a0, a2) = (at(0, 0, 0), at(0, 0, -2));
    let (b1, b3) = (at(0, 1, -1), at(0, 1, -3));
    let delta = a2 * b1 - a0 * b3;
    if b1 == 0.0 || delta == 0.0 {
        return None;
    }
    Some(LoopMatrix::from_terms(
        h_minus.order(),
        &[
            (0, identity2()),
            (1, Mat2::new(C64::new(0.0, 0.0), C64::new(b1 * b1 / delta, 0.0), C64::new(a0 / b1, 0.0), C64::new(0.0, 0.0))),
            (2, upper_left(a0 * b1 / delta)),
        ],
    ))
}

fn upper_left(x: f64) -> Mat2 {
    Mat2::new(C64::new(x, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0))
}

/// `P(0)⁻¹ P`, the representative of a plus factor with constant term `I`.
pub fn normalize_plus(plus: &LoopMatrix) -> LoopMatrix {
    plus.premultiply_const(&adjugate2(&plus.coeff(0)).scale(1.0 / plus.coeff(0).determinant().re))
}

/// Largest entry of `‖Φ₊‖` over all coefficients; grows without bound as `Φ` approaches a small cell.
pub fn plus_norm(f: &BirkhoffFactors) -> f64 {
    f.plus.terms().map(|(_, m)| max_abs2(m)).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loopalg::mat2;

    const N: usize = 24;

    fn lower_unipotent(c: f64, deg: i32) -> LoopMatrix {
        LoopMatrix::from_terms(N, &[(0, identity2()), (deg, mat2(0.0, 0.0, c, 0.0))])
    }

    #[test]
    fn identity_factors_trivially() {
        let f = factor_left(&LoopMatrix::identity(N)).unwrap();
        assert_eq!(f.minus, LoopMatrix::identity(N));
        assert_eq!(f.plus, LoopMatrix::identity(N));
        assert_eq!(detect_cell(&LoopMatrix::identity(N)).stratum, Stratum::BigCell);
    }

    #[test]
    fn omega_times_unipotent() {
        let phi = LoopMatrix::omega(N, 1).multiply(&lower_unipotent(1.0, -1));
        let expected_phi = LoopMatrix::from_terms(
            N,
            &[(0, mat2(1.0, 0.0, 0.0, 0.0)), (1, mat2(0.0, 1.0, 0.0, 0.0)), (-1, mat2(0.0, 0.0, -1.0, 0.0))],
        );
        assert_eq!(phi.max_diff(&expected_phi), 0.0);
        let f = factor_left(&phi).unwrap();
        assert!(f.minus.max_diff(&lower_unipotent(-1.0, -1)) < 1e-12);
        let plus = LoopMatrix::from_terms(N, &[(0, identity2()), (1, mat2(0.0, 1.0, 0.0, 0.0))]);
        assert!(f.plus.max_diff(&plus) < 1e-12);
        let s = switch_formula(1, &lower_unipotent(1.0, -1)).unwrap();
        assert!(s.minus.max_diff(&f.minus) < 1e-12 && s.plus.max_diff(&f.plus) < 1e-12);
    }

    #[test]
    fn middle_terms_are_detected() {
        let c = detect_cell(&LoopMatrix::omega(N, 1));
        assert_eq!(c.stratum, Stratum::P1);
        assert_eq!(c.c_minus1, 0.0);
        let c = detect_cell(&LoopMatrix::omega(N, -1));
        assert_eq!(c.stratum, Stratum::Pm1);
        assert_eq!(c.b_minus1, 0.0);
        assert_eq!(detect_cell(&LoopMatrix::omega(N, 2)).stratum, Stratum::P2);
        assert_eq!(detect_cell(&LoopMatrix::omega(N, -2)).stratum, Stratum::Pm2);
        assert_eq!(detect_cell(&LoopMatrix::omega(N, 3)).stratum, Stratum::Deeper);
    }

    #[test]
    fn shifted_factor_exposes_pivot() {
        let f = shifted_factor(1, &LoopMatrix::omega(N, 1)).unwrap();
        assert_eq!(f.minus, LoopMatrix::identity(N));
        assert_eq!(f.c_minus1(), 0.0);
        for eps in [1e-1, 1e-2, 1e-3] {
            let phi = LoopMatrix::omega(N, 1).multiply(&lower_unipotent(eps, -1));
            let f = shifted_factor(1, &phi).unwrap();
            assert!((f.c_minus1() - eps).abs() < 1e-14);
        }
    }

    #[test]
    fn small_cell_switch_returns_middle_term_form() {
        match switch_formula(1, &LoopMatrix::identity(N)) {
            Err(BirkhoffError::SmallCell { left, k }) => {
                assert_eq!(k, 1);
                assert_eq!(left, LoopMatrix::identity(N));
            }
            other => panic!("expected small cell, got {other:?}"),
        }
    }
}
