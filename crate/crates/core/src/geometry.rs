//! Vectors in L³ through the identification with trace-free real 2×2
//! matrices, Euclidean normals, the singular-set function χ, null
//! directions, and the singularity classifier.

use crate::frame::{Coords, FrameField, Grid};
use crate::loopalg::{Mat2, C64};
use crate::tolerances::Tolerances;
use nalgebra::{Matrix2, SMatrix};
use serde::Serialize;
use std::ops::{Add, Mul, Neg, Sub};

pub type RMat2 = Matrix2<f64>;

/// `t·e₀ + x₁·e₁ + x₂·e₂` in L³ with signature (−, +, +).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct MinkVec {
    pub t: f64,
    pub x1: f64,
    pub x2: f64,
}

impl MinkVec {
    pub const fn new(t: f64, x1: f64, x2: f64) -> Self {
        Self { t, x1, x2 }
    }

    pub const fn e0() -> Self {
        Self::new(1.0, 0.0, 0.0)
    }

    pub const fn e1() -> Self {
        Self::new(0.0, 1.0, 0.0)
    }

    pub const fn e2() -> Self {
        Self::new(0.0, 0.0, 1.0)
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.t, self.x1, self.x2]
    }

    /// `[[−x₂, −t + x₁], [t + x₁, x₂]]`.
    pub fn to_matrix(self) -> RMat2 {
        RMat2::new(-self.x2, -self.t + self.x1, self.t + self.x1, self.x2)
    }

    /// Inverse of [`MinkVec::to_matrix`] on trace-free matrices.
    pub fn from_matrix(m: &RMat2) -> Self {
        Self::new((m[(1, 0)] - m[(0, 1)]) / 2.0, (m[(0, 1)] + m[(1, 0)]) / 2.0, (m[(1, 1)] - m[(0, 0)]) / 2.0)
    }

    /// Real part of a complex matrix, then [`MinkVec::from_matrix`].
    pub fn from_complex(m: &Mat2) -> Self {
        Self::from_matrix(&m.map(|z| z.re))
    }

    pub fn norm_e(self) -> f64 {
        eucl_ip(self, self).sqrt()
    }

    pub fn normalized_e(self) -> Self {
        self * (1.0 / self.norm_e())
    }
}

impl Add for MinkVec {
    type Output = MinkVec;
    fn add(self, o: MinkVec) -> MinkVec {
        MinkVec::new(self.t + o.t, self.x1 + o.x1, self.x2 + o.x2)
    }
}

impl Sub for MinkVec {
    type Output = MinkVec;
    fn sub(self, o: MinkVec) -> MinkVec {
        MinkVec::new(self.t - o.t, self.x1 - o.x1, self.x2 - o.x2)
    }
}

impl Mul<f64> for MinkVec {
    type Output = MinkVec;
    fn mul(self, s: f64) -> MinkVec {
        MinkVec::new(self.t * s, self.x1 * s, self.x2 * s)
    }
}

impl Neg for MinkVec {
    type Output = MinkVec;
    fn neg(self) -> MinkVec {
        self * -1.0
    }
}

pub fn mink_ip(a: MinkVec, b: MinkVec) -> f64 {
    -a.t * b.t + a.x1 * b.x1 + a.x2 * b.x2
}

pub fn eucl_ip(a: MinkVec, b: MinkVec) -> f64 {
    a.t * b.t + a.x1 * b.x1 + a.x2 * b.x2
}

/// Euclidean cross product in the basis `e₀, e₁, e₂`.
pub fn cross(a: MinkVec, b: MinkVec) -> MinkVec {
    MinkVec::new(a.x1 * b.x2 - a.x2 * b.x1, a.x2 * b.t - a.t * b.x2, a.t * b.x1 - a.x1 * b.t)
}

/// `[A, B]` of the matrix representatives.
pub fn bracket(a: MinkVec, b: MinkVec) -> MinkVec {
    let (ma, mb) = (a.to_matrix(), b.to_matrix());
    MinkVec::from_matrix(&(ma * mb - mb * ma))
}

/// `Ad_g(v) = g v g⁻¹` for `g ∈ SL(2, ℝ)`; the inverse is the adjugate.
pub fn ad(g: &RMat2, v: MinkVec) -> MinkVec {
    let inv = RMat2::new(g[(1, 1)], -g[(0, 1)], -g[(1, 0)], g[(0, 0)]) / g.determinant();
    MinkVec::from_matrix(&(g * v.to_matrix() * inv))
}

/// `Ad_{e₀}`, the reflection `(t, x₁, x₂) ↦ (t, −x₁, −x₂)`.
pub fn ad_e0(v: MinkVec) -> MinkVec {
    MinkVec::new(v.t, -v.x1, -v.x2)
}

/// Real part of a complex 2×2 matrix.
pub fn real2(m: &Mat2) -> RMat2 {
    m.map(|z: C64| z.re)
}

/// `Ad_{e₀}Ad_F(e₂)`, normalized: the Euclidean unit normal on the big cell.
pub fn euclidean_normal(frame: &RMat2) -> MinkVec {
    ad_e0(ad(frame, MinkVec::e2())).normalized_e()
}

/// Euclidean normal near the boundary `c₋₁ = 0`, from `F = Y G₊⁻¹` at `λ`.
/// Continuous across the boundary, where it becomes lightlike.
pub fn boundary_normal(frame: &RMat2, c_minus1: f64, lambda: f64) -> MinkVec {
    ad_e0(boundary_direction(frame, c_minus1, lambda)).normalized_e()
}

/// `Ad_F(c₋₁e₂ + λ(e₀ − e₁))`, proportional to the Minkowski normal.
pub fn boundary_direction(frame: &RMat2, c_minus1: f64, lambda: f64) -> MinkVec {
    ad(frame, MinkVec::e2() * c_minus1 + (MinkVec::e0() - MinkVec::e1()) * lambda)
}

/// The transverse field `Ad_F(−2e₂ − c₋₁(e₁ + e₀))` entering τ.
pub fn cross_cap_field(frame: &RMat2, c_minus1: f64) -> MinkVec {
    ad(frame, MinkVec::e2() * -2.0 - (MinkVec::e1() + MinkVec::e0()) * c_minus1)
}

/// `(value, derivative)` weights of a five point first-derivative stencil
/// whose first node sits at `offset` relative to the evaluation point.
const STENCILS: [(i64, [f64; 5]); 5] = [
    (-2, [1.0, -8.0, 0.0, 8.0, -1.0]),
    (-1, [-3.0, -10.0, 18.0, -6.0, 1.0]),
    (-3, [-1.0, 6.0, -18.0, 10.0, 3.0]),
    (0, [-25.0, 48.0, -36.0, 16.0, -3.0]),
    (-4, [3.0, -16.0, 36.0, -48.0, 25.0]),
];

/// Fourth-order first derivative at index `i` of a uniformly sampled
/// sequence with spacing `h`; `get` returns `None` where data is missing.
/// Prefers the central stencil and falls back to one-sided ones.
pub fn derivative<T, F>(len: usize, i: usize, h: f64, get: F) -> Option<T>
where
    T: Copy + Add<Output = T> + Mul<f64, Output = T>,
    F: Fn(usize) -> Option<T>,
{
    'stencil: for (offset, w) in STENCILS {
        let start = i as i64 + offset;
        if start < 0 || start + 4 >= len as i64 {
            continue;
        }
        let mut acc: Option<T> = None;
        for (k, wk) in w.iter().enumerate() {
            let Some(v) = get((start + k as i64) as usize) else { continue 'stencil };
            let term = v * (wk / (12.0 * h));
            acc = Some(match acc {
                None => term,
                Some(a) => a + term,
            });
        }
        return acc;
    }
    None
}

/// Derivative of a plain slice, see [`derivative`].
pub fn derivative_of(values: &[f64], i: usize, h: f64) -> Option<f64> {
    derivative(values.len(), i, h, |k| Some(values[k]))
}

/// Singular values `(σ₁, σ₂)` of a tall matrix with two columns.
pub fn singular_values<const R: usize>(m: &SMatrix<f64, R, 2>) -> (f64, f64) {
    let sv = nalgebra::DMatrix::from_column_slice(R, 2, m.as_slice()).svd(false, false).singular_values;
    (sv[0].max(sv[1]), sv[0].min(sv[1]))
}

/// `σ₂/σ₁` of `[v₁ v₂]`; `0` when both columns vanish.
pub fn rank_ratio(a: MinkVec, b: MinkVec) -> f64 {
    let m = SMatrix::<f64, 3, 2>::from_columns(&[a.to_array().into(), b.to_array().into()]);
    let (s1, s2) = singular_values(&m);
    if s1 == 0.0 {
        0.0
    } else {
        s2 / s1
    }
}

/// `σ₂/σ₁` of the 6×2 differential of `(f, n_E)`, with the `f` and `n_E`
/// blocks each scaled to unit size so blow-up of `f` does not mask `dn_E`.
pub fn front_ratio(fa: MinkVec, fb: MinkVec, na: MinkVec, nb: MinkVec) -> f64 {
    let unit = |a: f64, b: f64| {
        let m = a.max(b);
        if m > 0.0 { 1.0 / m } else { 0.0 }
    };
    let sf = unit(fa.norm_e(), fb.norm_e());
    let sn = unit(na.norm_e(), nb.norm_e());
    let col = |f: MinkVec, n: MinkVec| {
        nalgebra::Vector6::new(f.t * sf, f.x1 * sf, f.x2 * sf, n.t * sn, n.x1 * sn, n.x2 * sn)
    };
    let m = SMatrix::<f64, 6, 2>::from_columns(&[col(fa, na), col(fb, nb)]);
    let (s1, s2) = singular_values(&m);
    if s1 == 0.0 {
        0.0
    } else {
        s2 / s1
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NullDirectionError {
    #[error("df vanishes: not semi-regular")]
    RankZero,
    #[error("df has full rank (σ₂/σ₁ = {0:e})")]
    FullRank(f64),
}

/// Unit kernel direction of `df = [f_a f_b]` in parameter coordinates,
/// oriented with non-negative first component.
pub fn null_direction(fa: MinkVec, fb: MinkVec, tol: &Tolerances) -> Result<[f64; 2], NullDirectionError> {
    let m = SMatrix::<f64, 3, 2>::from_columns(&[fa.to_array().into(), fb.to_array().into()]);
    let (s1, s2) = singular_values(&m);
    if s1 <= tol.zero {
        return Err(NullDirectionError::RankZero);
    }
    if s2 / s1 > tol.rank {
        return Err(NullDirectionError::FullRank(s2 / s1));
    }
    let g = m.transpose() * m;
    let lam = s2 * s2;
    // Kernel of g − σ₂², taken from the better conditioned row.
    let (a, b, d) = (g[(0, 0)] - lam, g[(0, 1)], g[(1, 1)] - lam);
    let v = if a.abs() + b.abs() >= d.abs() + b.abs() { [-b, a] } else { [d, -b] };
    let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
    let mut eta = if n == 0.0 { [1.0, 0.0] } else { [v[0] / n, v[1] / n] };
    if eta[0] < 0.0 || (eta[0] == 0.0 && eta[1] < 0.0) {
        eta = [-eta[0], -eta[1]];
    }
    Ok(eta)
}

/// `det(a, b)` for vectors in the parameter plane.
pub fn det2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SingularityType {
    CuspidalEdge,
    Swallowtail,
    CuspidalCrossCap,
    Degenerate,
    #[serde(rename = "Fold/Other")]
    FoldOther,
}

impl SingularityType {
    pub fn name(self) -> &'static str {
        match self {
            SingularityType::CuspidalEdge => "cuspidal edge",
            SingularityType::Swallowtail => "swallowtail",
            SingularityType::CuspidalCrossCap => "cuspidal cross cap",
            SingularityType::Degenerate => "degenerate",
            SingularityType::FoldOther => "fold/other",
        }
    }
}

/// Class I points lie on the big cell, class II on its boundary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SingularClass {
    I,
    II,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Evidence {
    pub s: Option<f64>,
    pub t: Option<f64>,
    pub theta_prime: Option<f64>,
    pub s_prime: Option<f64>,
    pub t_prime: Option<f64>,
    pub tau: Option<f64>,
    pub tau_prime: Option<f64>,
    pub eta: Option<[f64; 2]>,
    pub det_gamma_eta: Option<f64>,
    pub det_gamma_eta_prime: Option<f64>,
    pub dchi: Option<[f64; 2]>,
    pub front_ratio: Option<f64>,
    pub nondegenerate: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SingularityReport {
    /// Parameter coordinates, `(x, y)` or `(u, v)`.
    pub location: [f64; 2],
    #[serde(rename = "type")]
    pub kind: SingularityType,
    pub class: SingularClass,
    pub evidence: Evidence,
    pub note: String,
}

/// Symbolic classification from Cauchy data at a point.
pub fn classify_symbolic(
    location: [f64; 2],
    (s, t, theta_prime): (f64, f64, f64),
    (s_prime, t_prime): (f64, f64),
    tol: &Tolerances,
) -> SingularityReport {
    let zero = |x: f64| x.abs() <= tol.zero;
    let evidence = Evidence {
        s: Some(s),
        t: Some(t),
        theta_prime: Some(theta_prime),
        s_prime: Some(s_prime),
        t_prime: Some(t_prime),
        tau: Some(-std::f64::consts::SQRT_2 * t * theta_prime),
        det_gamma_eta: Some(-s),
        det_gamma_eta_prime: Some(-s_prime),
        nondegenerate: !zero(theta_prime) && !zero(s - t) && !zero(s + t),
        ..Evidence::default()
    };
    let (kind, note) = if zero(theta_prime) {
        (SingularityType::Degenerate, "theta' vanishes")
    } else if zero(s - t) || zero(s + t) {
        (SingularityType::Degenerate, "s = ±t")
    } else if !zero(s) && !zero(t) {
        (SingularityType::CuspidalEdge, "s and t nonzero")
    } else if zero(s) && !zero(s_prime) && !zero(t) {
        (SingularityType::Swallowtail, "s has a simple zero, t nonzero")
    } else if zero(t) && !zero(t_prime) && !zero(s) {
        (SingularityType::CuspidalCrossCap, "t has a simple zero, s nonzero")
    } else if zero(t) {
        (SingularityType::Degenerate, "t has a multiple zero: not a front")
    } else {
        (SingularityType::FoldOther, "s has a multiple zero")
    };
    SingularityReport { location, kind, class: SingularClass::II, evidence, note: note.to_string() }
}

/// Numerical classification. `evidence` must carry `dchi`-based
/// non-degeneracy, the front ratio, `η`, `det(γ̇, η)` and its derivative
/// along the curve, and for class II points `τ` and `τ′`.
pub fn classify_numeric(location: [f64; 2], class: SingularClass, evidence: Evidence, tol: &Tolerances) -> SingularityReport {
    let small = |x: Option<f64>| x.is_none_or(|v| v.abs() <= tol.agreement);
    let (kind, note) = if !evidence.nondegenerate {
        (SingularityType::Degenerate, "dχ vanishes")
    } else if evidence.eta.is_none() {
        (SingularityType::Degenerate, "no null direction")
    } else {
        let front = evidence.front_ratio.is_some_and(|r| r > tol.rank);
        let transverse = !small(evidence.det_gamma_eta);
        if front {
            if transverse {
                (SingularityType::CuspidalEdge, "front, η transverse")
            } else if !small(evidence.det_gamma_eta_prime) {
                (SingularityType::Swallowtail, "front, det(γ̇, η) has a simple zero")
            } else {
                (SingularityType::FoldOther, "front, det(γ̇, η) has a multiple zero")
            }
        } else if transverse && evidence.tau.is_some() && small(evidence.tau) && !small(evidence.tau_prime) {
            (SingularityType::CuspidalCrossCap, "not a front, τ has a simple zero")
        } else {
            (SingularityType::Degenerate, "not a front")
        }
    };
    SingularityReport { location, kind, class, evidence, note: note.to_string() }
}

/// Fourth-order partial derivatives of a gridded quantity along the first
/// (`axis = 0`) or second (`axis = 1`) grid axis.
pub fn grid_derivative<T, F>(grid: &Grid, axis: usize, get: F) -> Vec<Option<T>>
where
    T: Copy + Add<Output = T> + Mul<f64, Output = T> + Send,
    F: Fn(usize) -> Option<T> + Sync,
{
    (0..grid.len())
        .map(|idx| {
            let (i, j) = grid.ij(idx);
            if axis == 0 {
                derivative(grid.na, i, grid.da, |k| get(grid.index(k, j)))
            } else {
                derivative(grid.nb, j, grid.db, |k| get(grid.index(i, k)))
            }
        })
        .collect()
}

/// Partial derivatives of `f`, `n_E` and the cross-cap field on the grid.
#[derive(Clone, Debug)]
pub struct FieldDerivatives {
    pub fa: Vec<Option<MinkVec>>,
    pub fb: Vec<Option<MinkVec>>,
    pub na: Vec<Option<MinkVec>>,
    pub nb: Vec<Option<MinkVec>>,
    pub za: Vec<Option<MinkVec>>,
    pub zb: Vec<Option<MinkVec>>,
}

pub fn field_derivatives(field: &FrameField) -> FieldDerivatives {
    let g = &field.grid;
    let s = &field.samples;
    FieldDerivatives {
        fa: grid_derivative(g, 0, |k| s[k].f),
        fb: grid_derivative(g, 1, |k| s[k].f),
        na: grid_derivative(g, 0, |k| s[k].n_e),
        nb: grid_derivative(g, 1, |k| s[k].n_e),
        za: grid_derivative(g, 0, |k| s[k].z),
        zb: grid_derivative(g, 1, |k| s[k].z),
    }
}

/// `χ` with `f_x × f_y = χ n_E`, and its gradient in grid coordinates.
#[derive(Clone, Debug)]
pub struct ChiField {
    pub chi: Vec<Option<f64>>,
    pub grad: Vec<Option<[f64; 2]>>,
    /// `max ‖f_a‖‖f_b‖`, the reference for relative zero tests on `dχ`.
    pub scale: f64,
}

pub fn chi_field(field: &FrameField, d: &FieldDerivatives) -> ChiField {
    let g = &field.grid;
    // f_u × f_v = 2 f_x × f_y
    let factor = if g.coords == Coords::UV { 0.5 } else { 1.0 };
    let chi: Vec<Option<f64>> = (0..g.len())
        .map(|k| Some(eucl_ip(cross(d.fa[k]?, d.fb[k]?), field.samples[k].n_e?) * factor))
        .collect();
    let ga = grid_derivative(g, 0, |k| chi[k]);
    let gb = grid_derivative(g, 1, |k| chi[k]);
    let grad = ga.iter().zip(&gb).map(|(a, b)| Some([(*a)?, (*b)?])).collect();
    let scale = (0..g.len())
        .filter_map(|k| Some(d.fa[k]?.norm_e() * d.fb[k]?.norm_e()))
        .fold(0.0, f64::max);
    ChiField { chi, grad, scale }
}

/// Smallest right singular vector of `[f_a f_b]`, without a rank test.
fn approximate_null_direction(fa: MinkVec, fb: MinkVec) -> Option<[f64; 2]> {
    let m = SMatrix::<f64, 3, 2>::from_columns(&[fa.to_array().into(), fb.to_array().into()]);
    let (s1, _) = singular_values(&m);
    if s1 == 0.0 {
        return None;
    }
    let g = m.transpose() * m;
    let eig = g.symmetric_eigen();
    let k = if eig.eigenvalues[0] <= eig.eigenvalues[1] { 0 } else { 1 };
    let v = eig.eigenvectors.column(k);
    let mut eta = [v[0], v[1]];
    if eta[0] < 0.0 || (eta[0] == 0.0 && eta[1] < 0.0) {
        eta = [-eta[0], -eta[1]];
    }
    Some(eta)
}

/// Grid points of one singular curve, ordered along `axis` (`1`: one point
/// per row, parametrized by `b`; `0`: one point per column).
#[derive(Clone, Debug, Serialize)]
pub struct SingularCurve {
    pub axis: usize,
    pub points: Vec<(usize, usize)>,
}

/// Singular set on the grid: boundary points that carry surface data, and
/// for every row and column the grid point nearest to each sign change of χ
/// (of `c₁b₂` where available).
pub fn singular_points(field: &FrameField, chi: &ChiField) -> Vec<(usize, usize)> {
    let g = &field.grid;
    let mut mark = vec![false; g.len()];
    for (k, s) in field.samples.iter().enumerate() {
        if !s.cell.is_big_cell() && s.f.is_some() {
            mark[k] = true;
        }
    }
    // On pair constructions χ has the sign of c₁b₂ wherever the frame exists,
    // and c₁b₂ stays finite where χ changes sign through a pole.
    let indicator = |k: usize| match (field.samples[k].c1, field.samples[k].b2) {
        (Some(c1), Some(b2)) => Some(c1 * b2),
        _ => chi.chi[k],
    };
    let mut scan = |a: usize, b: usize| {
        if let (Some(ca), Some(cb)) = (indicator(a), indicator(b)) {
            let both_regular = field.samples[a].cell.is_big_cell() && field.samples[b].cell.is_big_cell();
            if both_regular && ca * cb < 0.0 {
                mark[if ca.abs() <= cb.abs() { a } else { b }] = true;
            } else if both_regular && ca == 0.0 {
                mark[a] = true;
            }
        }
    };
    for j in 0..g.nb {
        for i in 0..g.na - 1 {
            scan(g.index(i, j), g.index(i + 1, j));
        }
    }
    for i in 0..g.na {
        for j in 0..g.nb - 1 {
            scan(g.index(i, j), g.index(i, j + 1));
        }
    }
    (0..g.len()).filter(|&k| mark[k]).map(|k| g.ij(k)).collect()
}

/// Groups singular points into curves of 8-connected (up to a gap of one
/// point) components, each ordered along its longer extent.
pub fn singular_curves(field: &FrameField, chi: &ChiField, points: &[(usize, usize)]) -> Vec<SingularCurve> {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        p[i] = r;
        r
    }
    let mut sorted: Vec<usize> = (0..n).collect();
    sorted.sort_by_key(|&k| (points[k].1, points[k].0));
    for (pos, &a) in sorted.iter().enumerate() {
        for &b in &sorted[pos + 1..] {
            if points[b].1 > points[a].1 + 2 {
                break;
            }
            if points[a].0.abs_diff(points[b].0) <= 2 {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent[ra] = rb;
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<(usize, usize)>> = Default::default();
    for k in 0..n {
        let r = find(&mut parent, k);
        groups.entry(r).or_default().push(points[k]);
    }
    let g = &field.grid;
    groups
        .into_values()
        .map(|pts| {
            let span = |sel: fn(&(usize, usize)) -> usize| {
                let lo = pts.iter().map(sel).min().unwrap_or(0);
                let hi = pts.iter().map(sel).max().unwrap_or(0);
                hi - lo
            };
            let axis = if span(|p| p.1) >= span(|p| p.0) { 1 } else { 0 };
            let mut best: std::collections::BTreeMap<usize, (usize, usize)> = Default::default();
            for p in pts {
                let key = if axis == 1 { p.1 } else { p.0 };
                let size = |q: (usize, usize)| chi.chi[g.index(q.0, q.1)].map_or(0.0, f64::abs);
                let keep = match best.get(&key) {
                    Some(&q) => size(p) < size(q),
                    None => true,
                };
                if keep {
                    best.insert(key, p);
                }
            }
            SingularCurve { axis, points: best.into_values().collect() }
        })
        .collect()
}

/// `s`, `t` at a point of `u = 0`, from `f_v = s·w`, `f_u = t·w` with the
/// image direction `w` scaled to have `e₀`-component `−1`.
pub fn cauchy_speeds(fu: MinkVec, fv: MinkVec) -> (f64, f64) {
    (-fv.t, -fu.t)
}

/// Classifies every point of every singular curve.
pub fn classify_curves(
    field: &FrameField,
    d: &FieldDerivatives,
    chi: &ChiField,
    curves: &[SingularCurve],
    tol: &Tolerances,
) -> Vec<SingularityReport> {
    let g = &field.grid;
    let boundary_uv = g.coords == Coords::UV;
    let mut reports = Vec::new();
    for curve in curves {
        let m = curve.points.len();
        let param_step = if curve.axis == 1 { g.db } else { g.da };
        // tangent in grid coordinates, normalized to unit speed along the curve parameter
        let pos: Vec<[f64; 2]> = curve.points.iter().map(|&(i, j)| g.param(i, j)).collect();
        let tangent = |k: usize| -> [f64; 2] {
            let other = 1 - curve.axis;
            let d_other = if m >= 5 {
                derivative(m, k, param_step, |q| Some(pos[q][other])).unwrap_or(0.0)
            } else if m >= 2 {
                let (a, b) = (k.saturating_sub(1), (k + 1).min(m - 1));
                (pos[b][other] - pos[a][other]) / ((b - a) as f64 * param_step)
            } else {
                0.0
            };
            if curve.axis == 1 {
                [d_other, 1.0]
            } else {
                [1.0, d_other]
            }
        };
        let mut evidences: Vec<Evidence> = Vec::with_capacity(m);
        for (k, &(i, j)) in curve.points.iter().enumerate() {
            let idx = g.index(i, j);
            let sample = &field.samples[idx];
            let mut ev = Evidence::default();
            if let (Some(fa), Some(fb)) = (d.fa[idx], d.fb[idx]) {
                let on_axis = boundary_uv && i == g.center_column() && !sample.cell.is_big_cell();
                ev.eta = if on_axis {
                    let (s, t) = cauchy_speeds(fa, fb);
                    ev.s = Some(s);
                    ev.t = Some(t);
                    Some([s, -t])
                } else {
                    approximate_null_direction(fa, fb)
                };
                if let (Some(na), Some(nb)) = (d.na[idx], d.nb[idx]) {
                    ev.front_ratio = Some(front_ratio(fa, fb, na, nb));
                }
            }
            ev.dchi = chi.grad[idx];
            let local = match (d.fa[idx], d.fb[idx]) {
                (Some(fa), Some(fb)) => fa.norm_e().max(fb.norm_e()).powi(2),
                _ => chi.scale,
            };
            ev.nondegenerate = ev.dchi.is_some_and(|gr| gr[0].hypot(gr[1]) > tol.nondegeneracy * local.max(f64::MIN_POSITIVE));
            if let Some(eta) = ev.eta {
                ev.det_gamma_eta = Some(det2(tangent(k), eta));
                if let (Some(za), Some(zb), Some(n)) = (d.za[idx], d.zb[idx], sample.n_e) {
                    ev.tau = Some(eucl_ip(n, za * eta[0] + zb * eta[1]));
                }
            }
            evidences.push(ev);
        }
        let along = |get: &dyn Fn(&Evidence) -> Option<f64>, k: usize| -> Option<f64> {
            if m < 5 {
                return None;
            }
            derivative(m, k, param_step, |q| get(&evidences[q]))
        };
        let det_prime: Vec<Option<f64>> = (0..m).map(|k| along(&|e| e.det_gamma_eta, k)).collect();
        let tau_prime: Vec<Option<f64>> = (0..m).map(|k| along(&|e| e.tau, k)).collect();
        let s_prime: Vec<Option<f64>> = (0..m).map(|k| along(&|e| e.s, k)).collect();
        let t_prime: Vec<Option<f64>> = (0..m).map(|k| along(&|e| e.t, k)).collect();
        for (k, mut ev) in evidences.into_iter().enumerate() {
            ev.det_gamma_eta_prime = det_prime[k];
            ev.tau_prime = tau_prime[k];
            ev.s_prime = s_prime[k];
            ev.t_prime = t_prime[k];
            let (i, j) = curve.points[k];
            let class = if field.samples[g.index(i, j)].cell.is_big_cell() { SingularClass::I } else { SingularClass::II };
            reports.push(classify_numeric(g.param(i, j), class, ev, tol));
        }
    }
    reports
}

/// Singular set, curves and per-point classification of a surface.
#[derive(Clone, Debug)]
pub struct SurfaceAnalysis {
    pub derivatives: FieldDerivatives,
    pub chi: ChiField,
    pub curves: Vec<SingularCurve>,
    pub reports: Vec<SingularityReport>,
    /// Largest `σ₂/σ₁` of `df` over the grid.
    pub max_rank_ratio: f64,
}

pub fn analyze(field: &FrameField, tol: &Tolerances) -> SurfaceAnalysis {
    let derivatives = field_derivatives(field);
    let chi = chi_field(field, &derivatives);
    let points = singular_points(field, &chi);
    let curves = singular_curves(field, &chi, &points);
    let reports = classify_curves(field, &derivatives, &chi, &curves, tol);
    let max_rank_ratio = (0..field.grid.len())
        .filter_map(|k| Some(rank_ratio(derivatives.fa[k]?, derivatives.fb[k]?)))
        .fold(0.0, f64::max);
    SurfaceAnalysis { derivatives, chi, curves, reports, max_rank_ratio }
}

/// `df` with `σ₂/σ₁` below this is not an immersion and is not checked.
const RANK_FLOOR: f64 = 1e-6;

/// Worst deviations from the timelike CMC conditions over the regular
/// interior points of a field.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct InvariantSummary {
    /// `max |⟨f_xy, N⟩ / ⟨f_x, f_y⟩ − H|`.
    pub max_cmc_error: f64,
    /// `max |⟨f_x, f_x⟩|, |⟨f_y, f_y⟩|` relative to `‖f_x‖‖f_y‖`.
    pub max_null_violation: f64,
    /// `max |⟨f_x, N⟩|, |⟨f_y, N⟩|` relative to `‖f_x‖`, `‖f_y‖`.
    pub max_normal_violation: f64,
    /// `max |⟨N, N⟩ − 1|`.
    pub max_unit_violation: f64,
    pub checked_points: usize,
}

/// Checks the surface against its null-coordinate, normal and mean
/// curvature conditions at immersed points. Points where `|⟨f_x, f_y⟩| < margin·‖f_x‖‖f_y‖`
/// (close to the singular set) are skipped for the curvature test.
pub fn cmc_invariants(field: &FrameField, d: &FieldDerivatives, margin: f64) -> InvariantSummary {
    let g = &field.grid;
    let faa = grid_derivative(g, 0, |k| d.fa[k]);
    let fab = grid_derivative(g, 1, |k| d.fa[k]);
    let fbb = grid_derivative(g, 1, |k| d.fb[k]);
    let h = field.h();
    let mut out = InvariantSummary::default();
    for k in 0..g.len() {
        let s = &field.samples[k];
        let (Some(n), Some(fa), Some(fb)) = (s.normal, d.fa[k], d.fb[k]) else { continue };
        if !s.cell.is_big_cell() {
            continue;
        }
        let (fx, fy, fxy) = match g.coords {
            Coords::XY => match fab[k] {
                Some(fxy) => (fa, fb, fxy),
                None => continue,
            },
            Coords::UV => match (faa[k], fbb[k]) {
                (Some(fuu), Some(fvv)) => ((fa + fb) * 0.5, (fb - fa) * 0.5, (fvv - fuu) * 0.25),
                _ => continue,
            },
        };
        let (nx, ny) = (fx.norm_e(), fy.norm_e());
        if nx == 0.0 || ny == 0.0 || rank_ratio(fx, fy) < RANK_FLOOR {
            continue;
        }
        out.checked_points += 1;
        let scale = nx * ny;
        out.max_null_violation = out
            .max_null_violation
            .max(mink_ip(fx, fx).abs() / scale)
            .max(mink_ip(fy, fy).abs() / scale);
        out.max_normal_violation = out
            .max_normal_violation
            .max(mink_ip(fx, n).abs() / nx)
            .max(mink_ip(fy, n).abs() / ny);
        out.max_unit_violation = out.max_unit_violation.max((mink_ip(n, n) - 1.0).abs());
        let metric = mink_ip(fx, fy);
        if metric.abs() >= margin * scale {
            out.max_cmc_error = out.max_cmc_error.max((mink_ip(fxy, n) / metric - h).abs());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_products() {
        let (e0, e1, e2) = (MinkVec::e0(), MinkVec::e1(), MinkVec::e2());
        assert_eq!(mink_ip(e0, e0), -1.0);
        assert_eq!(mink_ip(e0 + e1, e0 + e1), 0.0);
        assert_eq!(eucl_ip(e2, e2), 1.0);
        assert_eq!(bracket(e0, e1), e2 * 2.0);
        assert_eq!(bracket(e1, e2), e0 * -2.0);
        assert_eq!(bracket(e2, e0), e1 * 2.0);
        assert_eq!(cross(e0, e1), e2);
        for v in [e0, e1, e2] {
            assert!((0.5 * (v.to_matrix() * v.to_matrix()).trace() - mink_ip(v, v)).abs() < 1e-15);
        }
    }

    #[test]
    fn cross_matches_bracket() {
        let a = MinkVec::new(0.3, -1.2, 0.7);
        let b = MinkVec::new(-0.4, 0.9, 2.1);
        let via_bracket = ad_e0(bracket(a, b)) * -0.5;
        assert!((cross(a, b) - via_bracket).norm_e() < 1e-14);
    }

    #[test]
    fn normals_at_identity() {
        assert_eq!(euclidean_normal(&RMat2::identity()), -MinkVec::e2());
        let n = boundary_normal(&RMat2::identity(), 0.0, 1.0);
        let expected = (MinkVec::e0() + MinkVec::e1()) * std::f64::consts::FRAC_1_SQRT_2;
        assert!((n - expected).norm_e() < 1e-15);
        assert!(mink_ip(n, n).abs() < 1e-15);
    }

    #[test]
    fn fourth_order_stencils() {
        let h = 0.1;
        let xs: Vec<f64> = (0..9).map(|i| (i as f64 * h).powi(4)).collect();
        for i in 0..9 {
            let exact = 4.0 * (i as f64 * h).powi(3);
            assert!((derivative_of(&xs, i, h).unwrap() - exact).abs() < 1e-12, "i = {i}");
        }
    }

    #[test]
    fn null_direction_of_rank_one_map() {
        let tol = Tolerances::default();
        let w = MinkVec::new(-1.0, 1.0, 0.0);
        let eta = null_direction(w * 1.0, w * 2.0, &tol).unwrap();
        assert!((eta[0] * 1.0 + eta[1] * 2.0).abs() < 1e-14);
        assert!(matches!(null_direction(MinkVec::e0(), MinkVec::e1(), &tol), Err(NullDirectionError::FullRank(_))));
        assert_eq!(null_direction(MinkVec::default(), MinkVec::default(), &tol), Err(NullDirectionError::RankZero));
    }

    #[test]
    fn symbolic_types() {
        let tol = Tolerances::default();
        let kind = |s, t, th, sp, tp| classify_symbolic([0.0, 0.0], (s, t, th), (sp, tp), &tol).kind;
        assert_eq!(kind(2.0, 1.0, 1.0, 0.0, 0.0), SingularityType::CuspidalEdge);
        assert_eq!(kind(0.0, 1.0, 1.0, 1.0, 0.0), SingularityType::Swallowtail);
        assert_eq!(kind(2.0, 0.0, 1.0, 0.0, 1.0), SingularityType::CuspidalCrossCap);
        assert_eq!(kind(1.0, 1.0, 0.1, 0.0, 0.0), SingularityType::Degenerate);
        assert_eq!(kind(1.0, 0.0, 1e-4, 0.0, 0.0), SingularityType::Degenerate);
        assert_eq!(kind(0.0, 1.0, 1.0, 0.0, 0.0), SingularityType::FoldOther);
    }
}
