mod common;

use common::*;
use proptest::prelude::*;
use tcmc::birkhoff::Stratum;
use tcmc::cauchy::*;
use tcmc::frame::characteristic_construct;
use tcmc::geometry::*;
use tcmc::loopalg::C64;
use tcmc::potentials::{parse_spec, PolyFn, Spec};
use tcmc::tolerances::Tolerances;

/// `−e₀ + cos θ e₁ + sin θ e₂`.
fn data_direction(theta: f64) -> MinkVec {
    MinkVec::new(-1.0, theta.cos(), theta.sin())
}

fn cross_cap_data() -> CauchyData {
    cauchy(&[2.0, 0.0, 0.2], &[0.0, 1.0], &[0.0, 1.0])
}

#[test]
fn surface_reproduces_the_data_along_the_curve() {
    for data in [cross_cap_data(), cauchy(&[1.0, 0.5], &[0.5, 0.0, -1.0], &[0.0, 0.7, 0.2])] {
        let field = cauchy_field(&data, (-0.5, 0.5), (11, 101));
        let d = field_derivatives(&field);
        let c = field.grid.center_column();
        for j in 2..99 {
            let k = field.grid.index(c, j);
            let v = field.grid.param(c, j)[1];
            let dir = data_direction(data.theta.eval(v));
            assert!((d.fb[k].unwrap() - dir * data.s.eval(v)).norm_e() < 1e-6, "f_v at v = {v}");
            assert!((d.fa[k].unwrap() - dir * data.t.eval(v)).norm_e() < 1e-6, "f_u at v = {v}");
            let n = field.samples[k].n_e.unwrap();
            assert!(mink_ip(n, n).abs() < 1e-6);
        }
    }
}

#[test]
fn euclidean_normal_at_the_base_point() {
    let field = cauchy_field(&cross_cap_data(), (-0.5, 0.5), (11, 101));
    let n = field.sample(field.grid.center_column(), 50).n_e.unwrap();
    let expected = (MinkVec::e0() + MinkVec::e1()) * std::f64::consts::FRAC_1_SQRT_2;
    assert!((n - expected).norm_e() < 1e-8);
}

#[test]
fn limiting_derivatives_on_the_diagonal() {
    let data = cross_cap_data();
    let pot = noncharacteristic_potential(&data);
    let field = cauchy_field(&data, (-0.5, 0.5), (11, 101));
    let d = field_derivatives(&field);
    let c = field.grid.center_column();
    for j in [10, 50, 80] {
        let k = field.grid.index(c, j);
        let v = field.grid.param(c, j)[1];
        let y = real2(&field.x_axis.samples[c + j].eval(C64::new(1.0, 0.0)));
        let null = ad(&y, MinkVec::e0() - MinkVec::e1());
        let (fu, fv) = (d.fa[k].unwrap(), d.fb[k].unwrap());
        let (fx, fy) = ((fu + fv) * 0.5, (fv - fu) * 0.5);
        assert!((fx - null * pot.gamma1.eval(v)).norm_e() < 1e-5);
        assert!((fy - null * -pot.gamma_m3.eval(v)).norm_e() < 1e-5);
    }
}

#[test]
fn dchi_matches_its_closed_form() {
    let data = cross_cap_data();
    let pot = noncharacteristic_potential(&data);
    let field = cauchy_field(&data, (-0.5, 0.5), (21, 101));
    let a = analyze(&field, &Tolerances::default());
    let c = field.grid.center_column();
    for j in (5..96).step_by(5) {
        let v = field.grid.param(c, j)[1];
        let closed = -4.0 * 2f64.sqrt() * pot.beta1.eval(v) * pot.gamma1.eval(v) * pot.gamma_m3.eval(v);
        let numeric = a.chi.grad[field.grid.index(c, j)].unwrap()[0];
        assert!((numeric - closed).abs() <= 1e-5 * closed.abs(), "v = {v}: {numeric} vs {closed}");
    }
}

#[test]
fn degenerate_data_never_reach_the_big_cell() {
    let field = cauchy_field(&cauchy(&[3.0], &[2.0], &[0.0]), (-0.5, 0.5), (11, 21));
    assert_eq!(field.cell_counts()[0], 0);
    let a = analyze(&field, &Tolerances::default());
    assert!(a.max_rank_ratio <= 1e-6);
}

#[test]
fn boxed_formula_at_the_cross_cap() {
    let p = noncharacteristic_potential(&cross_cap_data());
    let at = |f: &PolyFn| f.eval(0.0);
    assert_eq!((at(&p.gamma1), at(&p.gamma_m1), at(&p.beta1)), (-1.0, 0.5, -0.5));
    assert_eq!(at(&p.gamma_m3), 1.0);
    let flat = noncharacteristic_potential(&cauchy(&[1.0, 0.5], &[1.0, 0.5], &[0.0, 1.0]));
    assert!(flat.gamma_m3.is_zero());
}

#[test]
fn characteristic_data_from_config() {
    let text = "[cauchy.characteristic]\ns = 1\ndelta = 1\nsigma = 1\nH = 1\ninterval = -0.5 0.5\ngrid = 21 21\n";
    let parsed = parse_spec(text).unwrap();
    let Spec::CauchyCharacteristic(data) = &parsed.spec else { panic!("wrong family") };
    assert_eq!(data.t0, -1.0);
    let right = parse_spec(&text.replace("delta = 1", "delta = 0 1")).unwrap();
    let Spec::CauchyCharacteristic(data_right) = &right.spec else { panic!("wrong family") };
    assert_eq!(data_right.t0, 0.0);
    let moving_t = text.replace("s = 1", "s = 1\nt = 0 1");
    assert!(parse_spec(&moving_t).is_err());
}

#[test]
fn characteristic_singular_curve_is_a_straight_line() {
    let data = CharCauchyData::new(
        PolyFn::constant('x', 1.0),
        None,
        PolyFn::constant('y', 1.0),
        PolyFn::constant('y', 1.0),
        vec![],
        1.0,
    )
    .unwrap();
    let (pair, diags) = characteristic_pair(&data);
    assert!(diags.is_empty());
    let field = characteristic_construct(&pair, &settings((-0.5, 0.5), (21, 21)), Default::default()).unwrap();
    let row = 10;
    let points: Vec<MinkVec> = (0..21).map(|i| field.sample(i, row).f.unwrap()).collect();
    for i in 0..21 {
        assert_eq!(field.sample(i, row).cell.stratum, Stratum::P1);
        let area = cross(points[i] - points[0], points[20] - points[0]).norm_e();
        assert!(area < 1e-8, "point {i} is off the line by {area}");
    }
    let dir = points[20] - points[0];
    assert!(mink_ip(dir, dir).abs() < 1e-8 * dir.norm_e().powi(2), "the curve is null");
}

proptest! {
    #[test]
    fn rotation_frame_solves_the_potential_at_lambda_one(
        s in prop::collection::vec(-2.0..2.0f64, 1..4),
        t in prop::collection::vec(-2.0..2.0f64, 1..4),
        dtheta in prop::collection::vec(-2.0..2.0f64, 1..3),
        h in 0.5..2.0f64,
        v in -1.0..1.0f64,
    ) {
        let mut theta = vec![0.0];
        theta.extend(dtheta.iter().enumerate().map(|(i, c)| c / (i + 1) as f64));
        let data = CauchyData::new(poly('v', &s), poly('v', &t), poly('v', &theta), h).unwrap();
        let psi = noncharacteristic_potential(&data).psi(v).eval(C64::new(1.0, 0.0));
        let half = data.theta.derivative().eval(v) / 2.0;
        // F₀⁻¹F₀′ for the rotation by θ/2
        prop_assert!(psi[(0, 0)].norm() < 1e-12 && psi[(1, 1)].norm() < 1e-12);
        prop_assert!((psi[(0, 1)].re + half).abs() < 1e-12 * (1.0 + half.abs()));
        prop_assert!((psi[(1, 0)].re - half).abs() < 1e-12 * (1.0 + half.abs()));
    }
}
