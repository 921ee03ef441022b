//! Line-oriented configuration format.
//!
//! ```text
//! # class I example with cuspidal edges along x = ±1
//! [pair]
//! alpha = 1
//! beta = -1 0 1
//! gamma = 1
//! delta = 1
//! H = 1.0
//! interval = -1.5 1.5
//! grid = 301 301
//! ```
//!
//! One family section per file: `[pair]`, `[singular]`, `[characteristic]`,
//! `[cauchy]` or `[cauchy.characteristic]`. Polynomials are written as
//! coefficient lists, lowest degree first.

use super::{
    Axis, CharSingularPair, Diagnostic, Entry, ExtraTerm, PolyFn, PotentialError, PotentialPair, SingularPotential,
};
use crate::cauchy::{CauchyData, CharCauchyData};
use crate::loopalg::DEFAULT_TRUNCATION;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Root tolerance used when validating parsed data.
const ROOT_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Spec {
    Pair(PotentialPair),
    Singular(SingularPotential),
    Characteristic(CharSingularPair),
    Cauchy(CauchyData),
    CauchyCharacteristic(CharCauchyData),
}

impl Spec {
    pub fn section(&self) -> &'static str {
        match self {
            Spec::Pair(_) => "pair",
            Spec::Singular(_) => "singular",
            Spec::Characteristic(_) => "characteristic",
            Spec::Cauchy(_) => "cauchy",
            Spec::CauchyCharacteristic(_) => "cauchy.characteristic",
        }
    }

    pub fn h(&self) -> f64 {
        match self {
            Spec::Pair(p) => p.h,
            Spec::Singular(p) => p.h,
            Spec::Characteristic(p) => p.h,
            Spec::Cauchy(d) => d.h,
            Spec::CauchyCharacteristic(d) => d.h,
        }
    }

    /// Whether the grid is laid out in `(u, v)` around the diagonal `x = y`.
    pub fn uses_uv_grid(&self) -> bool {
        matches!(self, Spec::Singular(_) | Spec::Cauchy(_))
    }
}

/// Grid and integration settings shared by all families.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Settings {
    /// `x` range for pairs, `v` range for singular data.
    pub interval: (f64, f64),
    /// Separate `y` range for pairs; defaults to `interval`.
    pub interval_y: Option<(f64, f64)>,
    /// `(nx, ny)` or `(nu, nv)`; `nu` is odd so that `u = 0` is a grid line.
    pub grid: (usize, usize),
    /// Base point: `(x₀, y₀)` for pairs, `(0, v₀)` for singular data.
    pub origin: (f64, f64),
    pub truncation: usize,
    pub lambda: f64,
    /// Runge–Kutta steps per grid step.
    pub substeps: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            interval: (-1.0, 1.0),
            interval_y: None,
            grid: (201, 201),
            origin: (0.0, 0.0),
            truncation: DEFAULT_TRUNCATION,
            lambda: 1.0,
            substeps: 4,
        }
    }
}

impl Settings {
    pub fn interval_y(&self) -> (f64, f64) {
        self.interval_y.unwrap_or(self.interval)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParsedConfig {
    pub spec: Spec,
    pub settings: Settings,
    pub diagnostics: Vec<Diagnostic>,
}

struct Entries {
    section: String,
    values: BTreeMap<String, (usize, String)>,
}

impl Entries {
    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.values.remove(key)
    }

    fn poly(&mut self, key: &str, var: char) -> Result<Option<PolyFn>, PotentialError> {
        self.take(key).map(|(line, v)| parse_poly(line, &v, var)).transpose()
    }

    fn required_poly(&mut self, key: &str, var: char) -> Result<PolyFn, PotentialError> {
        self.poly(key, var)?.ok_or_else(|| missing(&self.section, key))
    }

    fn real(&mut self, key: &str) -> Result<Option<f64>, PotentialError> {
        self.take(key)
            .map(|(line, v)| {
                let xs = parse_reals(line, &v)?;
                match xs.as_slice() {
                    [x] => Ok(*x),
                    _ => Err(parse_err(line, format!("{key} expects one number"))),
                }
            })
            .transpose()
    }

    fn required_real(&mut self, key: &str) -> Result<f64, PotentialError> {
        self.real(key)?.ok_or_else(|| missing(&self.section, key))
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> PotentialError {
    PotentialError::Parse { line, msg: msg.into() }
}

fn missing(section: &str, key: &str) -> PotentialError {
    parse_err(0, format!("[{section}] requires `{key}`"))
}

fn parse_reals(line: usize, text: &str) -> Result<Vec<f64>, PotentialError> {
    text.split_whitespace()
        .map(|w| {
            w.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| parse_err(line, format!("not a finite number: {w:?}")))
        })
        .collect()
}

fn parse_poly(line: usize, text: &str, var: char) -> Result<PolyFn, PotentialError> {
    let coeffs = parse_reals(line, text)?;
    if coeffs.is_empty() {
        return Err(parse_err(line, "empty coefficient list"));
    }
    Ok(PolyFn::new(var, coeffs))
}

fn parse_interval(line: usize, text: &str) -> Result<(f64, f64), PotentialError> {
    match parse_reals(line, text)?.as_slice() {
        [a, b] if a < b => Ok((*a, *b)),
        _ => Err(parse_err(line, "interval expects two increasing numbers")),
    }
}

fn parse_count(line: usize, text: &str, min: usize) -> Result<usize, PotentialError> {
    text.trim()
        .parse::<usize>()
        .ok()
        .filter(|&n| n >= min)
        .ok_or_else(|| parse_err(line, format!("expected an integer >= {min}, got {text:?}")))
}

/// Splits the text into the single family section and its `key = value` entries.
fn split_sections(text: &str) -> Result<Entries, PotentialError> {
    let mut current: Option<Entries> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(name) = body.strip_prefix('[').and_then(|b| b.strip_suffix(']')) {
            let name = name.trim();
            if !["pair", "singular", "characteristic", "cauchy", "cauchy.characteristic"].contains(&name) {
                return Err(parse_err(line, format!("unknown section [{name}]")));
            }
            if current.is_some() {
                return Err(parse_err(line, "only one section per config"));
            }
            current = Some(Entries { section: name.to_string(), values: BTreeMap::new() });
            continue;
        }
        let entries = current.as_mut().ok_or_else(|| parse_err(line, "entry before any section"))?;
        let (key, value) = body.split_once('=').ok_or_else(|| parse_err(line, "expected `key = value`"))?;
        let key = key.trim().to_string();
        if entries.values.insert(key.clone(), (line, value.trim().to_string())).is_some() {
            return Err(parse_err(line, format!("duplicate key `{key}`")));
        }
    }
    current.ok_or_else(|| parse_err(0, "no section found; expected [pair], [singular], [characteristic], [cauchy] or [cauchy.characteristic]"))
}

fn parse_settings(e: &mut Entries, uv: bool) -> Result<Settings, PotentialError> {
    let mut s = Settings::default();
    if let Some((line, v)) = e.take("kind") {
        if v != "polynomial" {
            return Err(parse_err(line, format!("unsupported function kind {v:?}")));
        }
    }
    if let Some((line, v)) = e.take("interval") {
        s.interval = parse_interval(line, &v)?;
    }
    if !uv {
        if let Some((line, v)) = e.take("interval_y") {
            s.interval_y = Some(parse_interval(line, &v)?);
        }
    }
    if let Some((line, v)) = e.take("grid") {
        let parts: Vec<&str> = v.split_whitespace().collect();
        if parts.len() != 2 {
            return Err(parse_err(line, "grid expects two sizes"));
        }
        s.grid = (parse_count(line, parts[0], if uv { 3 } else { 2 })?, parse_count(line, parts[1], 2)?);
        if uv && s.grid.0 % 2 == 0 {
            return Err(parse_err(line, "the u size of the grid must be odd"));
        }
    }
    if let Some((line, v)) = e.take("origin") {
        let xs = parse_reals(line, &v)?;
        s.origin = match (uv, xs.as_slice()) {
            (true, [v0]) => (0.0, *v0),
            (false, [x0, y0]) => (*x0, *y0),
            _ => return Err(parse_err(line, if uv { "origin expects v0" } else { "origin expects x0 y0" })),
        };
    }
    if let Some((line, v)) = e.take("truncation") {
        s.truncation = parse_count(line, &v, 4)?;
    }
    if let Some(l) = e.real("lambda")? {
        if l == 0.0 {
            return Err(parse_err(0, "lambda must be non-zero"));
        }
        s.lambda = l;
    }
    if let Some((line, v)) = e.take("substeps") {
        s.substeps = parse_count(line, &v, 1)?;
    }
    Ok(s)
}

fn parse_h(e: &mut Entries) -> Result<f64, PotentialError> {
    let h = e.required_real("H")?;
    if h == 0.0 {
        return Err(PotentialError::invalid("H", None, "mean curvature must be non-zero"));
    }
    Ok(h)
}

fn parse_extras(e: &mut Entries, axes: &[Axis]) -> Result<Vec<ExtraTerm>, PotentialError> {
    let keys: Vec<String> = e.values.keys().filter(|k| k.starts_with("term.")).cloned().collect();
    let mut out = Vec::new();
    for key in keys {
        let (line, value) = e.take(&key).expect("key listed above");
        let parts: Vec<&str> = key.split('.').collect();
        let bad = || parse_err(line, format!("malformed term key `{key}`; expected term.<x|y>.<11|12|21>.<degree>"));
        if parts.len() != 4 {
            return Err(bad());
        }
        let axis = match parts[1] {
            "x" => Axis::X,
            "y" => Axis::Y,
            _ => return Err(bad()),
        };
        let entry = Entry::parse(parts[2]).ok_or_else(bad)?;
        let degree: i32 = parts[3].parse().map_err(|_| bad())?;
        if !axes.contains(&axis) {
            return Err(parse_err(line, format!("extra {} terms are not allowed in this section", parts[1])));
        }
        let allowed = match axis {
            Axis::X => degree <= 0,
            Axis::Y => degree >= 0,
        };
        if !allowed {
            return Err(parse_err(line, format!("degree {degree} is outside the extra terms of the {} potential", parts[1])));
        }
        if !entry.allows(degree) {
            return Err(parse_err(line, format!("entry {} cannot carry the odd/even degree {degree}", parts[2])));
        }
        let var = if axis == Axis::X { 'x' } else { 'y' };
        out.push(ExtraTerm { axis, entry, degree, poly: parse_poly(line, &value, var)? });
    }
    Ok(out)
}

/// Parses and validates a config. Validation failures name the function and location.
pub fn parse_spec(text: &str) -> Result<ParsedConfig, PotentialError> {
    let mut e = split_sections(text)?;
    let section = e.section.clone();
    let uv = matches!(section.as_str(), "singular" | "cauchy");
    let settings = parse_settings(&mut e, uv)?;
    let (ix, iy) = (settings.interval, settings.interval_y());
    let (spec, diagnostics) = match section.as_str() {
        "pair" => {
            let pair = PotentialPair {
                alpha: e.required_poly("alpha", 'x')?,
                beta: e.required_poly("beta", 'x')?,
                gamma: e.required_poly("gamma", 'y')?,
                delta: e.required_poly("delta", 'y')?,
                h: parse_h(&mut e)?,
                extra: parse_extras(&mut e, &[Axis::X, Axis::Y])?,
            };
            let d = pair.validate(ix, iy, ROOT_TOL)?;
            (Spec::Pair(pair), d)
        }
        "singular" => {
            let pot = SingularPotential {
                alpha0: e.poly("alpha0", 'v')?.unwrap_or_else(|| PolyFn::zero('v')),
                beta1: e.required_poly("beta1", 'v')?,
                gamma1: e.required_poly("gamma1", 'v')?,
                gamma_m1: e.required_poly("gamma_m1", 'v')?,
                gamma_m3: e.required_poly("gamma_m3", 'v')?,
                h: parse_h(&mut e)?,
            };
            let d = pot.validate(ix, ROOT_TOL)?;
            (Spec::Singular(pot), d)
        }
        "characteristic" => {
            let pair = CharSingularPair {
                alpha0: e.poly("alpha0", 'x')?.unwrap_or_else(|| PolyFn::zero('x')),
                gamma_m1: e.required_poly("gamma_m1", 'x')?,
                gamma1: e.required_poly("gamma1", 'x')?,
                delta: e.required_poly("delta", 'y')?,
                sigma: e.required_poly("sigma", 'y')?,
                h: parse_h(&mut e)?,
                extra: parse_extras(&mut e, &[Axis::Y])?,
            };
            let d = pair.validate(ix, iy, ROOT_TOL)?;
            (Spec::Characteristic(pair), d)
        }
        "cauchy" => {
            let data = CauchyData {
                s: e.required_poly("s", 'v')?,
                t: e.required_poly("t", 'v')?,
                theta: e.required_poly("theta", 'v')?,
                h: parse_h(&mut e)?,
            };
            let d = data.validate(ix, ROOT_TOL)?;
            (Spec::Cauchy(data), d)
        }
        _ => {
            let s = e.required_poly("s", 'x')?;
            let delta = e.required_poly("delta", 'y')?;
            let sigma = e.required_poly("sigma", 'y')?;
            let h = parse_h(&mut e)?;
            let t0 = match (e.real("t0")?, e.poly("t", 'x')?) {
                (Some(_), Some(_)) => return Err(parse_err(0, "give either t0 or t, not both")),
                (Some(t0), None) => Some(t0),
                (None, Some(t)) if t.is_constant() => Some(t.eval(0.0)),
                (None, Some(_)) => {
                    return Err(PotentialError::invalid("t", None, "must be constant along a characteristic curve"))
                }
                (None, None) => None,
            };
            let extra = parse_extras(&mut e, &[Axis::Y])?;
            let data = CharCauchyData::new(s, t0, delta, sigma, extra, h)?;
            let d = data.validate(ix, iy, ROOT_TOL)?;
            (Spec::CauchyCharacteristic(data), d)
        }
    };
    if let Some((key, (line, _))) = e.values.iter().next() {
        return Err(parse_err(*line, format!("unknown key `{key}` in [{section}]")));
    }
    Ok(ParsedConfig { spec, settings, diagnostics })
}

fn fmt_poly(p: &PolyFn) -> String {
    p.coeffs().iter().map(|c| format!("{c:?}")).collect::<Vec<_>>().join(" ")
}

/// Prints a config that [`parse_spec`] reads back to the same value.
pub fn print_config(spec: &Spec, settings: &Settings) -> String {
    let mut out = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(out, "{k} = {v}");
    };
    let extras = |kv: &mut dyn FnMut(&str, String), extra: &[ExtraTerm]| {
        for t in extra {
            let axis = if t.axis == Axis::X { "x" } else { "y" };
            kv(&format!("term.{axis}.{}.{}", t.entry.name(), t.degree), fmt_poly(&t.poly));
        }
    };
    match spec {
        Spec::Pair(p) => {
            kv("alpha", fmt_poly(&p.alpha));
            kv("beta", fmt_poly(&p.beta));
            kv("gamma", fmt_poly(&p.gamma));
            kv("delta", fmt_poly(&p.delta));
            kv("H", format!("{:?}", p.h));
            extras(&mut kv, &p.extra);
        }
        Spec::Singular(p) => {
            kv("alpha0", fmt_poly(&p.alpha0));
            kv("beta1", fmt_poly(&p.beta1));
            kv("gamma1", fmt_poly(&p.gamma1));
            kv("gamma_m1", fmt_poly(&p.gamma_m1));
            kv("gamma_m3", fmt_poly(&p.gamma_m3));
            kv("H", format!("{:?}", p.h));
        }
        Spec::Characteristic(p) => {
            kv("alpha0", fmt_poly(&p.alpha0));
            kv("gamma_m1", fmt_poly(&p.gamma_m1));
            kv("gamma1", fmt_poly(&p.gamma1));
            kv("delta", fmt_poly(&p.delta));
            kv("sigma", fmt_poly(&p.sigma));
            kv("H", format!("{:?}", p.h));
            extras(&mut kv, &p.extra);
        }
        Spec::Cauchy(d) => {
            kv("s", fmt_poly(&d.s));
            kv("t", fmt_poly(&d.t));
            kv("theta", fmt_poly(&d.theta));
            kv("H", format!("{:?}", d.h));
        }
        Spec::CauchyCharacteristic(d) => {
            kv("s", fmt_poly(&d.s));
            kv("t0", format!("{:?}", d.t0));
            kv("delta", fmt_poly(&d.delta));
            kv("sigma", fmt_poly(&d.sigma));
            kv("H", format!("{:?}", d.h));
            extras(&mut kv, &d.extra);
        }
    }
    let uv = spec.uses_uv_grid();
    kv("interval", format!("{:?} {:?}", settings.interval.0, settings.interval.1));
    if let (false, Some((a, b))) = (uv, settings.interval_y) {
        kv("interval_y", format!("{a:?} {b:?}"));
    }
    kv("grid", format!("{} {}", settings.grid.0, settings.grid.1));
    if uv {
        kv("origin", format!("{:?}", settings.origin.1));
    } else {
        kv("origin", format!("{:?} {:?}", settings.origin.0, settings.origin.1));
    }
    kv("truncation", settings.truncation.to_string());
    kv("lambda", format!("{:?}", settings.lambda));
    kv("substeps", settings.substeps.to_string());
    format!("[{}]\n{out}", spec.section())
}
