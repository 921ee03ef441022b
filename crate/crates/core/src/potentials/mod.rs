//! Potential data: regular potential pairs, singular potentials and
//! characteristic singular pairs, all with polynomial coefficient functions.

pub mod config;

pub use config::{parse_spec, print_config, ParsedConfig, Settings, Spec};

use crate::loopalg::{mat2, LoopVectorField, Mat2};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PotentialError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{function}{}: {msg}", at.map(|x| format!(" at {x}")).unwrap_or_default())]
    Validation { function: String, at: Option<f64>, msg: String },
}

impl PotentialError {
    pub(crate) fn invalid(function: &str, at: Option<f64>, msg: impl Into<String>) -> Self {
        PotentialError::Validation { function: function.to_string(), at, msg: msg.into() }
    }
}

/// A real polynomial `Σ c_i t^i` in one named variable.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PolyFn {
    coeffs: Vec<f64>,
    var: char,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Root {
    pub at: f64,
    pub multiplicity: usize,
}

impl PolyFn {
    /// Coefficients lowest degree first.
    pub fn new(var: char, coeffs: Vec<f64>) -> Self {
        Self { coeffs, var }
    }

    pub fn constant(var: char, c: f64) -> Self {
        Self::new(var, vec![c])
    }

    pub fn zero(var: char) -> Self {
        Self::new(var, vec![0.0])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn var(&self) -> char {
        self.var
    }

    pub fn with_var(mut self, var: char) -> Self {
        self.var = var;
        self
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    pub fn derivative(&self) -> PolyFn {
        let coeffs: Vec<f64> = self.coeffs.iter().enumerate().skip(1).map(|(i, &c)| i as f64 * c).collect();
        if coeffs.is_empty() {
            Self::zero(self.var)
        } else {
            Self::new(self.var, coeffs)
        }
    }

    /// Degree ignoring trailing zero coefficients; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|&c| c != 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.degree().is_none()
    }

    pub fn is_constant(&self) -> bool {
        self.degree().unwrap_or(0) == 0
    }

    pub fn scale(&self, s: f64) -> PolyFn {
        Self::new(self.var, self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn add(&self, other: &PolyFn) -> PolyFn {
        let n = self.coeffs.len().max(other.coeffs.len());
        let at = |p: &PolyFn, i: usize| p.coeffs.get(i).copied().unwrap_or(0.0);
        Self::new(self.var, (0..n).map(|i| at(self, i) + at(other, i)).collect())
    }

    fn magnitude(&self) -> f64 {
        self.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    /// Real roots in `[a, b]` with multiplicities. Values below `tol` times the
    /// largest coefficient count as zero. The zero polynomial has no listed roots.
    pub fn roots_in(&self, a: f64, b: f64, tol: f64) -> Vec<Root> {
        distinct_roots(self, a, b, tol)
            .into_iter()
            .map(|at| {
                let mut multiplicity = 1;
                let mut d = self.derivative();
                while !d.is_zero() && d.eval(at).abs() <= tol * d.magnitude().max(1.0) {
                    multiplicity += 1;
                    d = d.derivative();
                }
                Root { at, multiplicity }
            })
            .collect()
    }
}

fn distinct_roots(p: &PolyFn, a: f64, b: f64, tol: f64) -> Vec<f64> {
    let Some(deg) = p.degree() else { return Vec::new() };
    if deg == 0 {
        return Vec::new();
    }
    let eps = tol * p.magnitude().max(1.0);
    let mut knots = vec![a];
    knots.extend(distinct_roots(&p.derivative(), a, b, tol));
    knots.push(b);
    let mut roots: Vec<f64> = knots.iter().copied().filter(|&c| p.eval(c).abs() <= eps).collect();
    for w in knots.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        let (plo, phi) = (p.eval(lo), p.eval(hi));
        if plo.abs() <= eps || phi.abs() <= eps || plo.signum() == phi.signum() {
            continue;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if p.eval(mid).signum() == plo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        roots.push(0.5 * (lo + hi));
    }
    roots.sort_by(|x, y| x.total_cmp(y));
    roots.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * (1.0 + y.abs()));
    roots
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Axis {
    X,
    Y,
}

/// Matrix slot of an extra potential term. `Diagonal` sets `(1,1)` and `-(2,2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Entry {
    Diagonal,
    Upper,
    Lower,
}

impl Entry {
    pub fn name(self) -> &'static str {
        match self {
            Entry::Diagonal => "11",
            Entry::Upper => "12",
            Entry::Lower => "21",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "11" => Some(Entry::Diagonal),
            "12" => Some(Entry::Upper),
            "21" => Some(Entry::Lower),
            _ => None,
        }
    }

    fn matrix(self, value: f64) -> Mat2 {
        match self {
            Entry::Diagonal => mat2(value, 0.0, 0.0, -value),
            Entry::Upper => mat2(0.0, value, 0.0, 0.0),
            Entry::Lower => mat2(0.0, 0.0, value, 0.0),
        }
    }

    /// Whether a term of this entry may sit in `degree` of a twisted loop.
    pub fn allows(self, degree: i32) -> bool {
        (degree.rem_euclid(2) == 0) == (self == Entry::Diagonal)
    }
}

/// A finitely supported higher or lower order term of a potential.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtraTerm {
    pub axis: Axis,
    pub entry: Entry,
    pub degree: i32,
    pub poly: PolyFn,
}

fn extras_at(extra: &[ExtraTerm], axis: Axis, t: f64) -> impl Iterator<Item = (i32, Mat2)> + '_ {
    extra.iter().filter(move |e| e.axis == axis).map(move |e| (e.degree, e.entry.matrix(e.poly.eval(t))))
}

/// `ψ^X = λ[[0, α], [β, 0]] dx + …`, `ψ^Y = λ⁻¹[[0, γ], [δ, 0]] dy + …`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PotentialPair {
    pub alpha: PolyFn,
    pub beta: PolyFn,
    pub gamma: PolyFn,
    pub delta: PolyFn,
    pub extra: Vec<ExtraTerm>,
    pub h: f64,
}

impl PotentialPair {
    pub fn psi_x(&self, x: f64) -> LoopVectorField {
        let lead = (1, mat2(0.0, self.alpha.eval(x), self.beta.eval(x), 0.0));
        LoopVectorField::from_terms(std::iter::once(lead).chain(extras_at(&self.extra, Axis::X, x)))
    }

    pub fn psi_y(&self, y: f64) -> LoopVectorField {
        let lead = (-1, mat2(0.0, self.gamma.eval(y), self.delta.eval(y), 0.0));
        LoopVectorField::from_terms(std::iter::once(lead).chain(extras_at(&self.extra, Axis::Y, y)))
    }
}

/// `ψ̃ = [[-α₀, -γ₁λ³ - γ₋₁λ - γ₋₃λ⁻¹], [-β₁λ⁻¹, α₀]] dv`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SingularPotential {
    pub alpha0: PolyFn,
    pub beta1: PolyFn,
    pub gamma1: PolyFn,
    pub gamma_m1: PolyFn,
    pub gamma_m3: PolyFn,
    pub h: f64,
}

impl SingularPotential {
    pub fn psi(&self, v: f64) -> LoopVectorField {
        let a0 = self.alpha0.eval(v);
        LoopVectorField::from_terms([
            (0, mat2(-a0, 0.0, 0.0, a0)),
            (3, mat2(0.0, -self.gamma1.eval(v), 0.0, 0.0)),
            (1, mat2(0.0, -self.gamma_m1.eval(v), 0.0, 0.0)),
            (-1, mat2(0.0, -self.gamma_m3.eval(v), -self.beta1.eval(v), 0.0)),
        ])
    }

    pub fn is_nondegenerate_at(&self, v: f64) -> bool {
        self.beta1.eval(v) != 0.0
    }

    pub fn is_regular_at(&self, v: f64) -> bool {
        self.gamma1.eval(v) != 0.0 && self.gamma_m3.eval(v) != 0.0
    }
}

/// `ψ̃^X = [[-α₀, -γ₋₁λ - γ₁λ³], [0, α₀]] dx`, `ψ^Y = [[0, δλ⁻¹], [σλ⁻¹, 0]] dy + …`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CharSingularPair {
    pub alpha0: PolyFn,
    pub gamma_m1: PolyFn,
    pub gamma1: PolyFn,
    pub delta: PolyFn,
    pub sigma: PolyFn,
    pub extra: Vec<ExtraTerm>,
    pub h: f64,
}

impl CharSingularPair {
    pub fn psi_x(&self, x: f64) -> LoopVectorField {
        let a0 = self.alpha0.eval(x);
        LoopVectorField::from_terms([
            (0, mat2(-a0, 0.0, 0.0, a0)),
            (1, mat2(0.0, -self.gamma_m1.eval(x), 0.0, 0.0)),
            (3, mat2(0.0, -self.gamma1.eval(x), 0.0, 0.0)),
        ])
    }

    pub fn psi_y(&self, y: f64) -> LoopVectorField {
        let lead = (-1, mat2(0.0, self.delta.eval(y), self.sigma.eval(y), 0.0));
        LoopVectorField::from_terms(std::iter::once(lead).chain(extras_at(&self.extra, Axis::Y, y)))
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.sigma.eval(0.0) != 0.0
    }
}

/// A non-fatal validation finding.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostic {
    pub function: String,
    pub at: Option<f64>,
    pub message: String,
}

impl Diagnostic {
    fn new(function: &str, at: Option<f64>, message: impl Into<String>) -> Self {
        Self { function: function.to_string(), at, message: message.into() }
    }
}

/// Zero set of a coefficient function on an interval.
enum Zeros {
    Identically,
    At(Vec<Root>),
}

fn zeros(p: &PolyFn, interval: (f64, f64), tol: f64) -> Zeros {
    if p.is_zero() {
        Zeros::Identically
    } else {
        Zeros::At(p.roots_in(interval.0, interval.1, tol))
    }
}

fn require_simple(name: &str, z: &Zeros) -> Result<(), PotentialError> {
    if let Zeros::At(roots) = z {
        if let Some(r) = roots.iter().find(|r| r.multiplicity > 1) {
            return Err(PotentialError::invalid(name, Some(r.at), format!("zero of order {}", r.multiplicity)));
        }
    }
    Ok(())
}

fn first_zero(z: &Zeros, interval: (f64, f64)) -> Option<f64> {
    match z {
        Zeros::Identically => Some(interval.0),
        Zeros::At(r) => r.first().map(|r| r.at),
    }
}

impl PotentialPair {
    /// Semi-regularity on `ix × iy`: β and γ never vanish together and
    /// their zeros are simple.
    pub fn validate(&self, ix: (f64, f64), iy: (f64, f64), tol: f64) -> Result<Vec<Diagnostic>, PotentialError> {
        let zb = zeros(&self.beta, ix, tol);
        let zg = zeros(&self.gamma, iy, tol);
        for (name, z) in [("beta", &zb), ("gamma", &zg)] {
            if matches!(z, Zeros::Identically) {
                return Err(PotentialError::invalid(name, None, "vanishes identically"));
            }
            require_simple(name, z)?;
        }
        if let (Some(x), Some(y)) = (first_zero(&zb, ix), first_zero(&zg, iy)) {
            return Err(PotentialError::invalid(
                "beta, gamma",
                None,
                format!("vanish simultaneously at (x, y) = ({x}, {y})"),
            ));
        }
        let mut diags = Vec::new();
        for (name, z) in [("beta", &zb), ("gamma", &zg)] {
            if let Zeros::At(roots) = z {
                for r in roots {
                    diags.push(Diagnostic::new(name, Some(r.at), "simple zero: class I singular line"));
                }
            }
        }
        Ok(diags)
    }
}

impl SingularPotential {
    /// γ₁ and γ₋₃ never vanish together and have at most simple zeros.
    /// Degeneracy (β₁ = 0) and irregularity are reported, not rejected.
    pub fn validate(&self, iv: (f64, f64), tol: f64) -> Result<Vec<Diagnostic>, PotentialError> {
        let z1 = zeros(&self.gamma1, iv, tol);
        let z3 = zeros(&self.gamma_m3, iv, tol);
        require_simple("gamma1", &z1)?;
        require_simple("gamma_m3", &z3)?;
        let common = match (&z1, &z3) {
            (Zeros::Identically, Zeros::Identically) => Some(iv.0),
            (Zeros::Identically, z) | (z, Zeros::Identically) => first_zero(z, iv),
            (Zeros::At(a), Zeros::At(b)) => {
                a.iter().find(|r| b.iter().any(|s| (r.at - s.at).abs() <= 1e-9 * (1.0 + r.at.abs()))).map(|r| r.at)
            }
        };
        if let Some(v) = common {
            return Err(PotentialError::invalid("gamma1, gamma_m3", Some(v), "vanish simultaneously"));
        }
        let mut diags = Vec::new();
        for (name, z) in [("gamma1", &z1), ("gamma_m3", &z3)] {
            match z {
                Zeros::Identically => diags.push(Diagnostic::new(name, None, "vanishes identically: not regular")),
                Zeros::At(roots) => {
                    for r in roots {
                        diags.push(Diagnostic::new(name, Some(r.at), "simple zero: not regular here"));
                    }
                }
            }
        }
        match zeros(&self.beta1, iv, tol) {
            Zeros::Identically => diags.push(Diagnostic::new("beta1", None, "vanishes identically: degenerate")),
            Zeros::At(roots) => {
                for r in roots {
                    diags.push(Diagnostic::new("beta1", Some(r.at), "zero: degenerate here"));
                }
            }
        }
        Ok(diags)
    }
}

impl CharSingularPair {
    /// γ₁ and δ never vanish together; σ(0) = 0 is reported as degenerate.
    pub fn validate(&self, ix: (f64, f64), iy: (f64, f64), tol: f64) -> Result<Vec<Diagnostic>, PotentialError> {
        let z1 = zeros(&self.gamma1, ix, tol);
        let zd = zeros(&self.delta, iy, tol);
        if let (Some(x), Some(y)) = (first_zero(&z1, ix), first_zero(&zd, iy)) {
            return Err(PotentialError::invalid(
                "gamma1, delta",
                None,
                format!("vanish simultaneously at (x, y) = ({x}, {y})"),
            ));
        }
        let mut diags = Vec::new();
        if !self.is_nondegenerate() {
            diags.push(Diagnostic::new("sigma", Some(0.0), "sigma(0) = 0: degenerate"));
        }
        Ok(diags)
    }
}
