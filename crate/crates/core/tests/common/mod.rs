#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tcmc::loopalg::{identity2, mat2, LoopMatrix};

pub const N: usize = 24;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `[[1, x λ^deg], [0, 1]]` or `[[1, 0], [x λ^deg, 1]]`.
pub fn unipotent(upper: bool, x: f64, deg: i32) -> LoopMatrix {
    let m = if upper { mat2(0.0, x, 0.0, 0.0) } else { mat2(0.0, 0.0, x, 0.0) };
    LoopMatrix::from_terms(N, &[(0, identity2()), (deg, m)])
}

fn coefficient(rng: &mut ChaCha8Rng, max: f64) -> f64 {
    let x: f64 = rng.gen_range(0.1..max);
    if rng.gen_bool(0.5) {
        x
    } else {
        -x
    }
}

/// Product of elementary unipotent factors in odd degrees `1` or `3` (times `sign`),
/// with total degree at most 8.
fn elementary_product(rng: &mut ChaCha8Rng, sign: i32, max: f64) -> LoopMatrix {
    let mut out = LoopMatrix::identity(N);
    let mut budget = 8;
    let mut upper = rng.gen_bool(0.5);
    while budget > 0 {
        let deg = if budget >= 3 && rng.gen_bool(0.4) { 3 } else { 1 };
        budget -= deg;
        out = out.multiply(&unipotent(upper, coefficient(rng, max), sign * deg));
        upper = if rng.gen_bool(0.7) { !upper } else { upper };
    }
    out
}

/// Random element of G⁻ with constant term `I`.
pub fn random_minus(rng: &mut ChaCha8Rng, max: f64) -> LoopMatrix {
    elementary_product(rng, -1, max)
}

/// Random element of G⁺ with a random constant diagonal factor.
pub fn random_plus(rng: &mut ChaCha8Rng, max: f64) -> LoopMatrix {
    let d: f64 = rng.gen_range(0.6..1.5);
    elementary_product(rng, 1, max).premultiply_const(&mat2(d, 0.0, 0.0, 1.0 / d))
}

/// Random element of G⁻ with a non-trivial constant diagonal term.
pub fn random_minus_unnormalized(rng: &mut ChaCha8Rng, max: f64) -> LoopMatrix {
    let d: f64 = rng.gen_range(0.6..1.5);
    random_minus(rng, max).premultiply_const(&mat2(d, 0.0, 0.0, 1.0 / d))
}

pub fn entry(m: &LoopMatrix, i: usize, j: usize, k: i32) -> f64 {
    m.coeff(k)[(i, j)].re
}

pub fn poly(var: char, c: &[f64]) -> tcmc::potentials::PolyFn {
    tcmc::potentials::PolyFn::new(var, c.to_vec())
}

/// `α = 1, β = β(x), γ = δ = 1`, `H = 1`.
pub fn pair_with_beta(beta: &[f64]) -> tcmc::potentials::PotentialPair {
    tcmc::potentials::PotentialPair {
        alpha: poly('x', &[1.0]),
        beta: poly('x', beta),
        gamma: poly('y', &[1.0]),
        delta: poly('y', &[1.0]),
        extra: vec![],
        h: 1.0,
    }
}

pub fn settings(interval: (f64, f64), grid: (usize, usize)) -> tcmc::potentials::Settings {
    tcmc::potentials::Settings { interval, grid, ..Default::default() }
}

/// Cauchy data with `H = 1`.
pub fn cauchy(s: &[f64], t: &[f64], theta: &[f64]) -> tcmc::cauchy::CauchyData {
    tcmc::cauchy::CauchyData::new(poly('v', s), poly('v', t), poly('v', theta), 1.0).unwrap()
}

/// Surface of Cauchy data on `v ∈ range`, grid `nu × nv`.
pub fn cauchy_field(
    data: &tcmc::cauchy::CauchyData,
    range: (f64, f64),
    grid: (usize, usize),
) -> tcmc::frame::FrameField {
    let pot = tcmc::cauchy::noncharacteristic_potential(data);
    tcmc::frame::singular_construct(&pot, &settings(range, grid), Default::default()).unwrap()
}
