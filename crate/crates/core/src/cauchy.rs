//! Geometric Cauchy data along a curve and the potentials that solve the
//! singular Cauchy problem for it.
//!
//! Along `u = 0` the data prescribe
//! `f_v = s(−e₀ + cos θ e₁ + sin θ e₂)` and `f_u = t(−e₀ + cos θ e₁ + sin θ e₂)`.

use crate::geometry::{classify_symbolic, SingularityReport};
use crate::potentials::{CharSingularPair, Diagnostic, ExtraTerm, PolyFn, PotentialError, SingularPotential};
use crate::tolerances::Tolerances;
use serde::Serialize;

/// Non-characteristic data: `s`, `t`, `θ` are functions of `v`, `θ(0) = 0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CauchyData {
    pub s: PolyFn,
    pub t: PolyFn,
    pub theta: PolyFn,
    pub h: f64,
}

impl CauchyData {
    pub fn new(s: PolyFn, t: PolyFn, theta: PolyFn, h: f64) -> Result<Self, PotentialError> {
        let data = Self { s: s.with_var('v'), t: t.with_var('v'), theta: theta.with_var('v'), h };
        if h == 0.0 {
            return Err(PotentialError::invalid("H", None, "mean curvature must be non-zero"));
        }
        if data.theta.eval(0.0) != 0.0 {
            return Err(PotentialError::invalid("theta", Some(0.0), "theta(0) must vanish"));
        }
        Ok(data)
    }

    /// Checks `θ(0) = 0` and the regularity of the resulting potential;
    /// data that never reach the big cell are reported, not rejected.
    pub fn validate(&self, iv: (f64, f64), tol: f64) -> Result<Vec<Diagnostic>, PotentialError> {
        if self.theta.eval(0.0) != 0.0 {
            return Err(PotentialError::invalid("theta", Some(0.0), "theta(0) must vanish"));
        }
        let mut diags = noncharacteristic_potential(self).validate(iv, tol)?;
        let degenerate = |function: &str, message: &str| Diagnostic {
            function: function.to_string(),
            at: None,
            message: message.to_string(),
        };
        if self.s.add(&self.t.scale(-1.0)).is_zero() {
            diags.push(degenerate("s, t", "s = t identically: degenerate data"));
        }
        if self.s.add(&self.t).is_zero() {
            diags.push(degenerate("s, t", "s = -t identically: degenerate data"));
        }
        if self.theta.derivative().is_zero() {
            diags.push(degenerate("theta", "theta' = 0 identically: degenerate data"));
        }
        Ok(diags)
    }

    /// Symbolic singularity type at `(0, v)`.
    pub fn predict_type(&self, v: f64, tol: &Tolerances) -> SingularityReport {
        predict_type(self, v, tol)
    }
}

/// The unique singular potential whose surface solves the non-characteristic problem:
/// `α₀ = 0`, `β₁ = −θ′/2`, `γ₁ = −H(s+t)/2`, `γ₋₁ = θ′/2 + Ht`, `γ₋₃ = H(s−t)/2`.
pub fn noncharacteristic_potential(data: &CauchyData) -> SingularPotential {
    let h = data.h;
    let dtheta = data.theta.derivative();
    SingularPotential {
        alpha0: PolyFn::zero('v'),
        beta1: dtheta.scale(-0.5),
        gamma1: data.s.add(&data.t).scale(-h / 2.0),
        gamma_m1: dtheta.scale(0.5).add(&data.t.scale(h)),
        gamma_m3: data.s.add(&data.t.scale(-1.0)).scale(h / 2.0),
        h,
    }
}

/// Characteristic data along `y = 0`: `s(x)`, constant `t₀`, and the free
/// functions `δ(y)`, `σ(y)` with `δ(0) = −t₀H`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CharCauchyData {
    pub s: PolyFn,
    pub t0: f64,
    pub delta: PolyFn,
    pub sigma: PolyFn,
    pub extra: Vec<ExtraTerm>,
    pub h: f64,
}

impl CharCauchyData {
    /// When `t0` is omitted it is read off from `δ(0) = −t₀H`.
    pub fn new(
        s: PolyFn,
        t0: Option<f64>,
        delta: PolyFn,
        sigma: PolyFn,
        extra: Vec<ExtraTerm>,
        h: f64,
    ) -> Result<Self, PotentialError> {
        if h == 0.0 {
            return Err(PotentialError::invalid("H", None, "mean curvature must be non-zero"));
        }
        let d0 = delta.eval(0.0);
        let t0 = match t0 {
            None => -d0 / h,
            Some(t0) if (d0 + t0 * h).abs() <= 1e-12 * (1.0 + d0.abs()) => t0,
            Some(t0) => {
                return Err(PotentialError::invalid(
                    "delta",
                    Some(0.0),
                    format!("delta(0) = {d0} must equal -t0*H = {}", -t0 * h),
                ))
            }
        };
        Ok(Self { s: s.with_var('x'), t0, delta: delta.with_var('y'), sigma: sigma.with_var('y'), extra, h })
    }

    pub fn validate(&self, ix: (f64, f64), iy: (f64, f64), tol: f64) -> Result<Vec<Diagnostic>, PotentialError> {
        if self.s.is_zero() {
            return Err(PotentialError::invalid("s", None, "vanishes identically"));
        }
        characteristic_pair(self).0.validate(ix, iy, tol)
    }
}

/// The characteristic pair `γ₁ = −sH`, `γ₋₁ = sH`, `α₀ = 0`, with `θ ≡ 0`;
/// the singular curve is then a straight line. Degenerate data
/// (`σ(0) = 0`) are returned with a diagnostic.
pub fn characteristic_pair(data: &CharCauchyData) -> (CharSingularPair, Vec<Diagnostic>) {
    let pair = CharSingularPair {
        alpha0: PolyFn::zero('x'),
        gamma_m1: data.s.scale(data.h),
        gamma1: data.s.scale(-data.h),
        delta: data.delta.clone(),
        sigma: data.sigma.clone(),
        extra: data.extra.clone(),
        h: data.h,
    };
    let mut diags = Vec::new();
    if !pair.is_nondegenerate() {
        log::warn!("sigma(0) = 0: the characteristic data are degenerate");
        diags.push(Diagnostic { function: "sigma".into(), at: Some(0.0), message: "sigma(0) = 0: degenerate".into() });
    }
    (pair, diags)
}

/// Exact evaluation of the cuspidal edge, swallowtail and cuspidal cross
/// cap criteria for non-characteristic data at `v`.
pub fn predict_type(data: &CauchyData, v: f64, tol: &Tolerances) -> SingularityReport {
    let d = |p: &PolyFn| p.derivative().eval(v);
    classify_symbolic(
        [0.0, v],
        (data.s.eval(v), data.t.eval(v), d(&data.theta)),
        (d(&data.s), d(&data.t)),
        tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SingularityType;

    fn poly(c: &[f64]) -> PolyFn {
        PolyFn::new('v', c.to_vec())
    }

    #[test]
    fn cross_cap_data_potential() {
        let data = CauchyData::new(poly(&[2.0, 0.0, 0.2]), poly(&[0.0, 1.0]), poly(&[0.0, 1.0]), 1.0).unwrap();
        let p = noncharacteristic_potential(&data);
        assert_eq!(p.gamma1.eval(0.0), -1.0);
        assert_eq!(p.gamma_m1.eval(0.0), 0.5);
        assert_eq!(p.gamma_m3.eval(0.0), 1.0);
        assert_eq!(p.beta1.eval(0.0), -0.5);
        assert_eq!(data.predict_type(0.0, &Tolerances::default()).kind, SingularityType::CuspidalCrossCap);
    }

    #[test]
    fn loop_entries_of_built_potential() {
        let data = CauchyData::new(poly(&[2.0]), poly(&[0.0]), poly(&[0.0, 1.0]), 1.0).unwrap();
        let psi = noncharacteristic_potential(&data).psi(0.0);
        let at = |k: i32, i: usize, j: usize| psi.coeff(k)[(i, j)].re;
        assert_eq!((at(3, 0, 1), at(1, 0, 1), at(-1, 0, 1)), (1.0, -0.5, -1.0));
        assert_eq!(at(-1, 1, 0), 0.5);
        assert_eq!((at(0, 0, 0), at(0, 1, 1)), (0.0, 0.0));
    }

    #[test]
    fn predicted_types() {
        let tol = Tolerances::default();
        let theta = poly(&[0.0, 1.0]);
        let swallowtail = CauchyData::new(poly(&[0.0, 1.0]), poly(&[1.0]), theta.clone(), 1.0).unwrap();
        assert_eq!(predict_type(&swallowtail, 0.0, &tol).kind, SingularityType::Swallowtail);
        let edge = CauchyData::new(poly(&[2.0]), poly(&[1.0]), theta, 1.0).unwrap();
        assert_eq!(predict_type(&edge, 0.0, &tol).kind, SingularityType::CuspidalEdge);
        let flat = CauchyData::new(poly(&[1.0]), poly(&[1.0]), poly(&[0.0, 0.1]), 1.0).unwrap();
        assert_eq!(predict_type(&flat, 0.0, &tol).kind, SingularityType::Degenerate);
        assert!(flat.validate((-1.0, 1.0), 1e-9).unwrap().iter().any(|d| d.message.contains("s = t")));
        assert!(CauchyData::new(poly(&[1.0]), poly(&[0.0]), poly(&[0.5, 1.0]), 1.0).is_err());
    }

    #[test]
    fn characteristic_t0_from_delta() {
        let d = CharCauchyData::new(PolyFn::constant('x', 1.0), None, poly(&[1.0]), poly(&[1.0]), vec![], 2.0).unwrap();
        assert_eq!(d.t0, -0.5);
        let (pair, diags) = characteristic_pair(&d);
        assert!(diags.is_empty());
        assert_eq!(pair.delta.eval(0.0), -d.t0 * d.h);
        assert_eq!(pair.gamma1.eval(0.3), -2.0);
        let flat = CharCauchyData::new(PolyFn::constant('x', 1.0), None, poly(&[0.0, 1.0]), poly(&[0.0, 1.0]), vec![], 1.0);
        assert_eq!(characteristic_pair(&flat.unwrap()).1.len(), 1);
        assert!(CharCauchyData::new(PolyFn::constant('x', 1.0), Some(1.0), poly(&[1.0]), poly(&[1.0]), vec![], 1.0).is_err());
    }
}
