//! Integration of potentials into loop-group frames, the d'Alembert and
//! singular constructions, and the Sym formula.

use crate::birkhoff::{detect_cell_with, factor_left_with, plus_norm, BirkhoffError, BirkhoffFactors, CellClass, Stratum};
use crate::geometry::{ad, ad_e0, boundary_direction, cross_cap_field, real2, MinkVec, RMat2};
use crate::loopalg::{adjugate2, mat2, LoopMatrix, LoopVectorField, Mat2, C64};
use crate::potentials::{CharSingularPair, PotentialPair, Settings, SingularPotential, Spec};
use crate::cauchy::{characteristic_pair, noncharacteristic_potential};
use crate::tolerances::Tolerances;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrameError {
    #[error("truncation tail {tail:e} exceeds {limit:e} at t = {at}; increase the truncation order")]
    TailOverflow { tail: f64, limit: f64, at: f64 },
    #[error("determinant drifted by {residual:e} at t = {at}")]
    DetDrift { residual: f64, at: f64 },
    #[error("not regular: {0}")]
    NotRegular(&'static str),
    #[error("invalid grid: {0}")]
    Grid(String),
}

/// Samples of `X(t)` on the lattice `start + k·step`, with `X(origin) = init`.
#[derive(Clone, Debug)]
pub struct AxisFrame {
    pub start: f64,
    pub step: f64,
    pub origin: f64,
    pub init: LoopMatrix,
    pub samples: Vec<LoopMatrix>,
}

impl AxisFrame {
    pub fn param(&self, k: usize) -> f64 {
        self.start + k as f64 * self.step
    }

    pub fn max_tail(&self) -> f64 {
        self.samples.iter().map(LoopMatrix::tail_mass).fold(0.0, f64::max)
    }
}

/// One classical Runge–Kutta step for `X′ = X·A(t)`.
pub fn rk4_step<F>(x: &LoopMatrix, t: f64, h: f64, psi: &F) -> LoopMatrix
where
    F: Fn(f64) -> LoopVectorField,
{
    let a_mid = psi(t + h / 2.0);
    let k1 = x.multiply_field(&psi(t));
    let k2 = x.add_scaled(&k1, h / 2.0).multiply_field(&a_mid);
    let k3 = x.add_scaled(&k2, h / 2.0).multiply_field(&a_mid);
    let k4 = x.add_scaled(&k3, h).multiply_field(&psi(t + h));
    let incr = k1.add_scaled(&k2, 2.0).add_scaled(&k3, 2.0).add_scaled(&k4, 1.0);
    x.add_scaled(&incr, h / 6.0)
}

/// `steps` equal RK4 steps from `from` to `to`.
pub fn integrate_to<F>(psi: &F, init: &LoopMatrix, from: f64, to: f64, steps: usize) -> LoopMatrix
where
    F: Fn(f64) -> LoopVectorField,
{
    if steps == 0 || from == to {
        return init.clone();
    }
    let h = (to - from) / steps as f64;
    let mut x = init.clone();
    for i in 0..steps {
        x = rk4_step(&x, from + i as f64 * h, h, psi);
    }
    x
}

fn check_sample(x: &LoopMatrix, at: f64, tol: &Tolerances) -> Result<(), FrameError> {
    let tail = x.tail_mass();
    if tail > tol.tail_overflow {
        return Err(FrameError::TailOverflow { tail, limit: tol.tail_overflow, at });
    }
    if tail > tol.tail_warning {
        log::warn!("truncation tail {tail:e} at t = {at}");
    }
    let residual = x.det_residual();
    if residual > tol.det_drift {
        return Err(FrameError::DetDrift { residual, at });
    }
    Ok(())
}

/// Integrates `X′ = X·ψ(t)`, `X(origin) = init`, onto `count` lattice points
/// `start + k·step`, with `substeps` RK4 steps per lattice step. The origin
/// need not lie on the lattice.
#[allow(clippy::too_many_arguments)]
pub fn integrate_loop_ode<F>(
    psi: &F,
    start: f64,
    step: f64,
    count: usize,
    origin: f64,
    substeps: usize,
    init: &LoopMatrix,
    tol: &Tolerances,
) -> Result<AxisFrame, FrameError>
where
    F: Fn(f64) -> LoopVectorField,
{
    if count < 2 || step <= 0.0 || substeps == 0 {
        return Err(FrameError::Grid(format!("need at least 2 points and a positive step, got {count} and {step}")));
    }
    let param = |k: usize| start + k as f64 * step;
    let k0 = (((origin - start) / step).round().max(0.0) as usize).min(count - 1);
    let lead = ((param(k0) - origin).abs() / step * substeps as f64).ceil() as usize;
    let mut samples = vec![LoopMatrix::zero(init.order()); count];
    samples[k0] = integrate_to(psi, init, origin, param(k0), lead);
    check_sample(&samples[k0], param(k0), tol)?;
    for k in k0 + 1..count {
        samples[k] = integrate_to(psi, &samples[k - 1], param(k - 1), param(k), substeps);
        check_sample(&samples[k], param(k), tol)?;
    }
    for k in (0..k0).rev() {
        samples[k] = integrate_to(psi, &samples[k + 1], param(k + 1), param(k), substeps);
        check_sample(&samples[k], param(k), tol)?;
    }
    Ok(AxisFrame { start, step, origin, init: init.clone(), samples })
}

/// `steps` RK4 steps over `[a, b]` starting from `X(a) = init`.
pub fn integrate_interval<F>(psi: &F, (a, b): (f64, f64), steps: usize, init: &LoopMatrix, tol: &Tolerances) -> Result<AxisFrame, FrameError>
where
    F: Fn(f64) -> LoopVectorField,
{
    integrate_loop_ode(psi, a, (b - a) / steps as f64, steps + 1, a, 1, init, tol)
}

fn inv2(m: &Mat2) -> Mat2 {
    adjugate2(m) / m.determinant()
}

fn e2_matrix() -> Mat2 {
    mat2(-1.0, 0.0, 0.0, 1.0)
}

/// Sym formula `(1/2H)(2λ ∂_λG·G⁻¹ − Ad_G e₂)` at real `λ`.
pub fn sym_point(g: &LoopMatrix, lambda: f64, h: f64) -> MinkVec {
    let (v, dv) = g.eval_real(lambda);
    let inv = inv2(&v);
    let m = (dv * inv * C64::new(2.0 * lambda, 0.0) - v * e2_matrix() * inv) / C64::new(2.0 * h, 0.0);
    MinkVec::from_complex(&m)
}

/// Sym formula for `F = Y P⁻¹`, evaluated without multiplying loops.
/// Returns the point and `F(λ)`.
pub fn sym_of_quotient(y: &LoopMatrix, p: &LoopMatrix, lambda: f64, h: f64) -> (MinkVec, RMat2) {
    let (yv, dy) = y.eval_real(lambda);
    let (pv, dp) = p.eval_real(lambda);
    let (yi, pi) = (inv2(&yv), inv2(&pv));
    let f = yv * pi;
    let log_deriv = dy * yi - yv * pi * dp * yi;
    let m = (log_deriv * C64::new(2.0 * lambda, 0.0) - f * e2_matrix() * inv2(&f)) / C64::new(2.0 * h, 0.0);
    (MinkVec::from_complex(&m), real2(&f))
}

/// Coordinate-frame data at a regular point of an admissible frame.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoordinateFrame {
    pub c1: f64,
    pub b2: f64,
    pub eps1: f64,
    pub eps2: f64,
    /// `ε e^ω = −4c₁b₂/H²`.
    pub eps_e_omega: f64,
    pub eps: f64,
    pub e_omega: f64,
    /// `ρ = |b₂/c₁|^{1/4}`; the gauge is `diag(ρ, ρ⁻¹)`.
    pub rho: f64,
}

/// Reads `c₁ = [A₁]₂₁` and `b₂ = [A₋₁]₁₂` off the Maurer–Cartan form
/// `λA₁dx + α₀ + λ⁻¹A₋₁dy`.
pub fn coordinate_frame_data(mc: &LoopVectorField, h: f64) -> Result<CoordinateFrame, FrameError> {
    let c1 = mc.coeff(1)[(1, 0)].re;
    let b2 = mc.coeff(-1)[(0, 1)].re;
    coordinate_frame_from(c1, b2, h)
}

pub fn coordinate_frame_from(c1: f64, b2: f64, h: f64) -> Result<CoordinateFrame, FrameError> {
    if c1 == 0.0 {
        return Err(FrameError::NotRegular("c1 vanishes"));
    }
    if b2 == 0.0 {
        return Err(FrameError::NotRegular("b2 vanishes"));
    }
    let eps_e_omega = -4.0 * c1 * b2 / (h * h);
    Ok(CoordinateFrame {
        c1,
        b2,
        eps1: c1.signum(),
        eps2: -b2.signum(),
        eps_e_omega,
        eps: eps_e_omega.signum(),
        e_omega: eps_e_omega.abs(),
        rho: (b2 / c1).abs().powf(0.25),
    })
}

/// The potential driving a construction.
#[derive(Clone, Debug, PartialEq)]
pub enum Potential {
    Pair(PotentialPair),
    /// One potential integrated along both axes; the grid is in `(u, v)`.
    Singular(SingularPotential),
    Characteristic(CharSingularPair),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Coords {
    XY,
    UV,
}

/// Uniform grid; the first axis is `x` or `u`, the second `y` or `v`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Grid {
    pub coords: Coords,
    pub a0: f64,
    pub da: f64,
    pub na: usize,
    pub b0: f64,
    pub db: f64,
    pub nb: usize,
}

impl Grid {
    pub fn xy(x: (f64, f64), y: (f64, f64), nx: usize, ny: usize) -> Result<Self, FrameError> {
        if nx < 2 || ny < 2 {
            return Err(FrameError::Grid(format!("grid {nx}x{ny} is too small")));
        }
        Ok(Self {
            coords: Coords::XY,
            a0: x.0,
            da: (x.1 - x.0) / (nx - 1) as f64,
            na: nx,
            b0: y.0,
            db: (y.1 - y.0) / (ny - 1) as f64,
            nb: ny,
        })
    }

    /// `v` spans `v_range`; `u` is centred on `0` with the same step, so
    /// `nu` must be odd.
    pub fn uv(v_range: (f64, f64), nu: usize, nv: usize) -> Result<Self, FrameError> {
        if nu < 3 || nu % 2 == 0 || nv < 2 {
            return Err(FrameError::Grid(format!("grid {nu}x{nv}: need odd nu >= 3 and nv >= 2")));
        }
        let h = (v_range.1 - v_range.0) / (nv - 1) as f64;
        Ok(Self { coords: Coords::UV, a0: -h * ((nu - 1) / 2) as f64, da: h, na: nu, b0: v_range.0, db: h, nb: nv })
    }

    pub fn len(&self) -> usize {
        self.na * self.nb
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.na + i
    }

    pub fn ij(&self, idx: usize) -> (usize, usize) {
        (idx % self.na, idx / self.na)
    }

    pub fn param(&self, i: usize, j: usize) -> [f64; 2] {
        [self.a0 + i as f64 * self.da, self.b0 + j as f64 * self.db]
    }

    pub fn to_xy(&self, p: [f64; 2]) -> (f64, f64) {
        match self.coords {
            Coords::XY => (p[0], p[1]),
            Coords::UV => (p[0] + p[1], p[1] - p[0]),
        }
    }

    /// Index of the `u = 0` column of a `(u, v)` grid.
    pub fn center_column(&self) -> usize {
        (self.na - 1) / 2
    }
}

/// Per-point output of a construction.
#[derive(Clone, Debug, Serialize)]
pub struct PointSample {
    pub cell: CellClass,
    /// Surface point, normalized so that the base point maps to `0`.
    pub f: Option<MinkVec>,
    /// Minkowski unit normal; absent on the boundary of the big cell.
    pub normal: Option<MinkVec>,
    /// Euclidean unit normal, continuous across class II singular curves.
    pub n_e: Option<MinkVec>,
    /// Transverse field for the cross-cap test (boundary constructions only).
    pub z: Option<MinkVec>,
    pub c1: Option<f64>,
    pub b2: Option<f64>,
    /// `c₋₁` of `G₋` in `X̃⁻¹Ŷ = G₋G₊`.
    pub c_minus1: Option<f64>,
    pub residual: f64,
    pub condition: f64,
    pub plus_norm: f64,
}

impl PointSample {
    fn off_cell(cell: CellClass, residual: f64) -> Self {
        Self {
            cell,
            f: None,
            normal: None,
            n_e: None,
            z: None,
            c1: None,
            b2: None,
            c_minus1: None,
            residual,
            condition: f64::INFINITY,
            plus_norm: f64::INFINITY,
        }
    }
}

/// Everything needed to turn axis frames into surface points.
#[derive(Clone, Debug)]
pub struct Pipeline {
    pub potential: Potential,
    pub lambda: f64,
    /// Base point `(x₀, y₀)`; `x₀ = y₀ = v₀` for singular potentials.
    pub origin: (f64, f64),
    pub truncation: usize,
    pub substeps: usize,
    /// Frames conjugated by `e₁`: the parallel surface.
    pub conjugated: bool,
    pub tol: Tolerances,
}

fn e1_matrix() -> Mat2 {
    mat2(0.0, 1.0, 1.0, 0.0)
}

impl Pipeline {
    pub fn new(potential: Potential, settings: &Settings, tol: Tolerances) -> Self {
        let origin = match potential {
            Potential::Singular(_) => (settings.origin.1, settings.origin.1),
            _ => settings.origin,
        };
        Self {
            potential,
            lambda: settings.lambda,
            origin,
            truncation: settings.truncation,
            substeps: settings.substeps,
            conjugated: false,
            tol,
        }
    }

    pub fn from_spec(spec: &Spec, settings: &Settings, tol: Tolerances) -> Self {
        let potential = match spec {
            Spec::Pair(p) => Potential::Pair(p.clone()),
            Spec::Singular(p) => Potential::Singular(p.clone()),
            Spec::Characteristic(p) => Potential::Characteristic(p.clone()),
            Spec::Cauchy(d) => Potential::Singular(noncharacteristic_potential(d)),
            Spec::CauchyCharacteristic(d) => Potential::Characteristic(characteristic_pair(d).0),
        };
        Self::new(potential, settings, tol)
    }

    pub fn h(&self) -> f64 {
        match &self.potential {
            Potential::Pair(p) => p.h,
            Potential::Singular(p) => p.h,
            Potential::Characteristic(p) => p.h,
        }
    }

    pub fn coords(&self) -> Coords {
        match self.potential {
            Potential::Singular(_) => Coords::UV,
            _ => Coords::XY,
        }
    }

    pub fn psi_x(&self, x: f64) -> LoopVectorField {
        match &self.potential {
            Potential::Pair(p) => p.psi_x(x),
            Potential::Singular(p) => p.psi(x),
            Potential::Characteristic(p) => p.psi_x(x),
        }
    }

    pub fn psi_y(&self, y: f64) -> LoopVectorField {
        match &self.potential {
            Potential::Pair(p) => p.psi_y(y),
            Potential::Singular(p) => p.psi(y),
            Potential::Characteristic(p) => p.psi_y(y),
        }
    }

    fn is_boundary_construction(&self) -> bool {
        !matches!(self.potential, Potential::Pair(_))
    }

    /// `Φ̂ = X̂⁻¹Ŷ` for pairs, `Φ̂ = ω₁X̃⁻¹Ŷ` otherwise.
    pub fn phi_hat(&self, xm: &LoopMatrix, ym: &LoopMatrix) -> LoopMatrix {
        let phi = xm.adjugate().multiply(ym);
        if self.is_boundary_construction() {
            LoopMatrix::omega(xm.order(), 1).multiply(&phi)
        } else {
            phi
        }
    }

    /// `X(x)` and `Y(y)` by direct integration from the base point with steps of at most `step`.
    pub fn axis_values(&self, x: f64, y: f64, step: f64) -> (LoopMatrix, LoopMatrix) {
        let id = LoopMatrix::identity(self.truncation);
        let n = |d: f64| (d.abs() / step).ceil() as usize;
        let xm = integrate_to(&|t| self.psi_x(t), &id, self.origin.0, x, n(x - self.origin.0));
        let ym = integrate_to(&|t| self.psi_y(t), &id, self.origin.1, y, n(y - self.origin.1));
        (xm, ym)
    }

    /// Point sample at `(x, y)`, integrating both axes directly.
    pub fn evaluate_at(&self, x: f64, y: f64, step: f64) -> PointSample {
        let (xm, ym) = self.axis_values(x, y, step);
        self.sample(&xm, &ym, x, y)
    }

    /// Factorization `X̃⁻¹Ŷ = G₋G₊` of a boundary construction, or
    /// `X̂⁻¹Ŷ = H₋H₊` of a pair.
    pub fn factors_at(&self, x: f64, y: f64, step: f64) -> Result<BirkhoffFactors, BirkhoffError> {
        let (xm, ym) = self.axis_values(x, y, step);
        factor_left_with(&xm.adjugate().multiply(&ym), &self.tol)
    }

    fn base_offset(&self) -> MinkVec {
        MinkVec::e2() * (1.0 / (2.0 * self.h()))
    }

    fn regular_sample(&self, ym: &LoopMatrix, fac: &BirkhoffFactors) -> PointSample {
        let (f, frame) = sym_of_quotient(ym, &fac.plus, self.lambda, self.h());
        let normal = ad(&frame, MinkVec::e2());
        PointSample {
            cell: CellClass::big_cell(fac),
            f: Some(f + self.base_offset()),
            normal: Some(normal),
            n_e: Some(ad_e0(normal).normalized_e()),
            z: None,
            c1: None,
            b2: None,
            c_minus1: None,
            residual: fac.residual,
            condition: fac.condition,
            plus_norm: plus_norm(fac),
        }
    }

    /// Assembles the point data from `X(x)` and `Y(y)`.
    pub fn sample(&self, xm: &LoopMatrix, ym: &LoopMatrix, x: f64, y: f64) -> PointSample {
        let tol = &self.tol;
        if self.conjugated {
            let e1 = e1_matrix();
            let phi = self.phi_hat(xm, ym).conjugate_const(&e1);
            let yc = ym.conjugate_const(&e1);
            return match factor_left_with(&phi, tol) {
                Ok(fac) => self.regular_sample(&yc, &fac),
                Err(e) => PointSample::off_cell(detect_cell_with(&phi, tol), residual_of(&e)),
            };
        }
        let phi = xm.adjugate().multiply(ym);
        match (&self.potential, factor_left_with(&phi, tol)) {
            (Potential::Pair(p), Ok(fac)) => {
                let mut s = self.regular_sample(ym, &fac);
                let h0 = fac.plus.coeff(0)[(0, 0)].re;
                s.c1 = Some(p.psi_x(x).coeff(1)[(1, 0)].re);
                s.b2 = Some(h0 * h0 * p.psi_y(y).coeff(-1)[(0, 1)].re);
                s
            }
            (Potential::Pair(_), Err(e)) => PointSample::off_cell(detect_cell_with(&phi, tol), residual_of(&e)),
            (_, Ok(fac)) => {
                let c = fac.c_minus1();
                let (f, frame) = sym_of_quotient(ym, &fac.plus, self.lambda, self.h());
                let w = boundary_direction(&frame, c, self.lambda);
                let on_boundary = c.abs() <= tol.zero;
                let stratum = if on_boundary { Stratum::P1 } else { Stratum::BigCell };
                PointSample {
                    cell: CellClass { stratum, c_minus1: c, b_minus1: fac.b_minus1() },
                    f: Some(f + self.base_offset()),
                    normal: (!on_boundary).then(|| w * (1.0 / c)),
                    n_e: Some(ad_e0(w).normalized_e()),
                    z: Some(cross_cap_field(&frame, c)),
                    c1: None,
                    b2: None,
                    c_minus1: Some(c),
                    residual: fac.residual,
                    condition: fac.condition,
                    plus_norm: plus_norm(&fac),
                }
            }
            (_, Err(e)) => {
                let phi_hat = LoopMatrix::omega(phi.order(), 1).multiply(&phi);
                PointSample::off_cell(detect_cell_with(&phi_hat, tol), residual_of(&e))
            }
        }
    }
}

fn residual_of(e: &BirkhoffError) -> f64 {
    match e {
        BirkhoffError::OffBigCell { residual, .. } => *residual,
        _ => f64::NAN,
    }
}

/// Coarse grids are integrated with extra substeps so that no RK4 step exceeds this.
pub const MAX_RK4_STEP: f64 = 0.01;

/// Surface data on a grid together with the axis frames it came from.
#[derive(Clone, Debug)]
pub struct FrameField {
    pub grid: Grid,
    pub pipeline: Pipeline,
    pub x_axis: AxisFrame,
    /// Absent for singular potentials, where `Ŷ = X̃` shares `x_axis`.
    pub y_axis: Option<AxisFrame>,
    pub samples: Vec<PointSample>,
}

impl FrameField {
    pub fn sample(&self, i: usize, j: usize) -> &PointSample {
        &self.samples[self.grid.index(i, j)]
    }

    pub fn h(&self) -> f64 {
        self.pipeline.h()
    }

    pub fn max_tail(&self) -> f64 {
        let y = self.y_axis.as_ref().map_or(0.0, AxisFrame::max_tail);
        self.x_axis.max_tail().max(y)
    }

    pub fn max_residual(&self) -> f64 {
        self.samples.iter().map(|s| s.residual).filter(|r| r.is_finite()).fold(0.0, f64::max)
    }

    /// Lattice indices of `X(x)` and `Y(y)` for grid point `(i, j)`.
    fn axis_indices(&self, i: usize, j: usize) -> (usize, usize) {
        match self.grid.coords {
            Coords::XY => (i, j),
            Coords::UV => (i + j, j + self.grid.na - 1 - i),
        }
    }

    fn fill_samples(&mut self) {
        let grid = self.grid;
        let samples: Vec<PointSample> = (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                let (i, j) = grid.ij(idx);
                let (kx, ky) = self.axis_indices(i, j);
                let ym = match &self.y_axis {
                    Some(axis) => &axis.samples[ky],
                    None => &self.x_axis.samples[ky],
                };
                let (x, y) = grid.to_xy(grid.param(i, j));
                self.pipeline.sample(&self.x_axis.samples[kx], ym, x, y)
            })
            .collect();
        self.samples = samples;
    }

    /// Integrates the axes for `grid` and evaluates every grid point.
    pub fn build(pipeline: Pipeline, grid: Grid) -> Result<Self, FrameError> {
        if pipeline.coords() != grid.coords {
            return Err(FrameError::Grid("grid coordinates do not match the potential".into()));
        }
        let id = LoopMatrix::identity(pipeline.truncation);
        let tol = pipeline.tol.clone();
        let sub = |step: f64| pipeline.substeps.max((step / MAX_RK4_STEP).ceil() as usize);
        let (x_axis, y_axis) = match grid.coords {
            Coords::XY => {
                let (sx, sy) = (sub(grid.da), sub(grid.db));
                let x = integrate_loop_ode(&|t| pipeline.psi_x(t), grid.a0, grid.da, grid.na, pipeline.origin.0, sx, &id, &tol)?;
                let y = integrate_loop_ode(&|t| pipeline.psi_y(t), grid.b0, grid.db, grid.nb, pipeline.origin.1, sy, &id, &tol)?;
                (x, Some(y))
            }
            Coords::UV => {
                let start = grid.b0 + grid.a0;
                let count = grid.na + grid.nb - 1;
                let x = integrate_loop_ode(&|t| pipeline.psi_x(t), start, grid.db, count, pipeline.origin.0, sub(grid.db), &id, &tol)?;
                (x, None)
            }
        };
        let mut field = FrameField { grid, pipeline, x_axis, y_axis, samples: Vec::new() };
        field.fill_samples();
        Ok(field)
    }

    /// Grid point counts per stratum, in the order big, P1, P-1, P2, P-2, deeper.
    pub fn cell_counts(&self) -> [usize; 6] {
        let mut counts = [0; 6];
        for s in &self.samples {
            let k = match s.cell.stratum {
                Stratum::BigCell => 0,
                Stratum::P1 => 1,
                Stratum::Pm1 => 2,
                Stratum::P2 => 3,
                Stratum::Pm2 => 4,
                Stratum::Deeper => 5,
            };
            counts[k] += 1;
        }
        counts
    }
}

/// Grid for a pipeline from the config settings.
pub fn grid_for(pipeline: &Pipeline, settings: &Settings) -> Result<Grid, FrameError> {
    match pipeline.coords() {
        Coords::XY => Grid::xy(settings.interval, settings.interval_y(), settings.grid.0, settings.grid.1),
        Coords::UV => Grid::uv(settings.interval, settings.grid.0, settings.grid.1),
    }
}

/// Surface of a potential pair on an `(x, y)` grid.
pub fn dalembert_construct(pair: &PotentialPair, settings: &Settings, tol: Tolerances) -> Result<FrameField, FrameError> {
    construct(Potential::Pair(pair.clone()), settings, tol)
}

/// Surface of a singular potential on a `(u, v)` grid around the diagonal.
pub fn singular_construct(pot: &SingularPotential, settings: &Settings, tol: Tolerances) -> Result<FrameField, FrameError> {
    construct(Potential::Singular(pot.clone()), settings, tol)
}

/// Surface of a characteristic singular pair on an `(x, y)` grid.
pub fn characteristic_construct(pair: &CharSingularPair, settings: &Settings, tol: Tolerances) -> Result<FrameField, FrameError> {
    construct(Potential::Characteristic(pair.clone()), settings, tol)
}

pub fn construct(potential: Potential, settings: &Settings, tol: Tolerances) -> Result<FrameField, FrameError> {
    let pipeline = Pipeline::new(potential, settings, tol);
    let grid = grid_for(&pipeline, settings)?;
    FrameField::build(pipeline, grid)
}

/// The parallel surface: every frame conjugated by `e₁`, which exchanges
/// `P^k` and `P^{−k}` for odd `k`.
pub fn parallel_surface(field: &FrameField) -> FrameField {
    let mut out = field.clone();
    out.pipeline.conjugated = !field.pipeline.conjugated;
    out.fill_samples();
    out
}
