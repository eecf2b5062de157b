//! Cross-module checks on small configurations.

use num_complex::Complex64;

use hypercross::approx::{approx_error, project_q, RateRegime, RegimeTag};
use hypercross::besov::{besov_norm_blocks, BesovParams};
use hypercross::extremal::{g1, g3, g7, WitnessConfig};
use hypercross::indexsets::{q_set, q_size, tail_sum, theta_sum};
use hypercross::majorant::MajorantParams;
use hypercross::trigpoly::{lp_norm, random_in_spectrum, CoefficientLaw, QuadratureSpec, TrigPolynomial};

fn omega(d: usize, r: f64, b: f64) -> MajorantParams {
    MajorantParams::isotropic(d, r, b, 2).unwrap()
}

#[test]
fn q_set_materializes_q_size() {
    let o = omega(2, 1.0, 0.0);
    assert_eq!(q_size(&o, 8.0).unwrap(), 20);
    let set = q_set(&o, 8.0).unwrap();
    assert_eq!(set.materialize(1 << 10).unwrap().len(), 20);
    assert!(set.materialize(10).is_err());
    let d1 = omega(1, 1.0, 0.0);
    let freqs = q_set(&d1, 8.0).unwrap().materialize(64).unwrap();
    assert_eq!(freqs.len(), 14);
    assert!(freqs.iter().all(|k| (1..8).contains(&k[0].abs())));
}

#[test]
fn polynomial_inside_q_has_zero_error() {
    let o = omega(2, 1.5, 0.25);
    let n = 1024.0;
    let f = random_in_spectrum(&q_set(&o, n).unwrap(), 9, CoefficientLaw::UnitComplex).unwrap();
    assert_eq!(project_q(&f, &o, n), f);
    for q in [1.0, 2.0, f64::INFINITY] {
        assert_eq!(approx_error(&f, &o, n, q, &QuadratureSpec::default()).unwrap(), 0.0);
    }
}

#[test]
fn g1_error_is_one_over_n() {
    let o = omega(1, 1.0, 0.0);
    let bp = BesovParams::new(2.0, 2.0).unwrap();
    let cfg = WitnessConfig::new(o.clone(), bp, 8.0);
    let g = g1(&cfg, None).unwrap();
    let err = approx_error(&g, &o, 8.0, 2.0, &QuadratureSpec::default()).unwrap();
    assert_eq!(err, 0.125);
}

#[test]
fn l2_error_grid_matches_parseval_tail() {
    let o = omega(2, 1.0, 0.0);
    let f = TrigPolynomial::from_terms(
        2,
        vec![
            (vec![1, 1], Complex64::new(1.0, 0.5)),
            (vec![9, -3], Complex64::new(0.25, 0.0)),
            (vec![-20, 17], Complex64::new(0.0, -0.75)),
        ],
    )
    .unwrap();
    let exact = approx_error(&f, &o, 16.0, 2.0, &QuadratureSpec::default()).unwrap();
    let grid = QuadratureSpec { mode: hypercross::trigpoly::QuadratureMode::EvenPowerExact, ..QuadratureSpec::default() };
    let via_grid = approx_error(&f, &o, 16.0, 2.0, &grid).unwrap();
    assert!((exact - via_grid).abs() <= 1e-10 * exact);
    let tail = (0.25f64 * 0.25 + 0.75 * 0.75).sqrt();
    assert!((exact - tail).abs() <= 1e-15);
}

#[test]
fn witnesses_sit_outside_q() {
    let o = omega(2, 1.5, 0.0);
    let bp = BesovParams::new(2.0, 4.0).unwrap();
    let quad = QuadratureSpec::default();
    for e in [12, 15, 18] {
        let n = (e as f64).exp2();
        let cfg = WitnessConfig::new(o.clone(), bp, n);
        for g in [g3(&cfg).unwrap(), g7(&cfg).unwrap()] {
            assert!(project_q(&g, &o, n).is_zero());
            let norm = besov_norm_blocks(&g, &o, &bp, &quad).unwrap();
            assert!(norm.is_finite() && norm > 0.0);
        }
        let g = g7(&cfg).unwrap();
        let sup = lp_norm(&g, f64::INFINITY, &quad).unwrap();
        assert!((sup - g.eval(&[0.0, 0.0]).re).abs() <= 1e-12 * sup);
    }
}

#[test]
fn tail_examples() {
    let o = omega(1, 1.0, 0.0);
    let t = tail_sum(&o, 8.0, 1.0, 0.0).unwrap();
    assert!((t.value - 0.125).abs() <= t.tail_bound + 1e-15);
    let t = tail_sum(&o, 8.0, 2.0, 0.5).unwrap();
    assert!((t.value - 0.125).abs() <= t.tail_bound + 1e-15);
    assert!((theta_sum(&o, 8.0, 1.0, 0.0).unwrap() - 3.0 / 32.0).abs() < 1e-15);
    assert!(tail_sum(&o, 8.0, 1.0, 1.0).is_err());
}

#[test]
fn rate_example_plug_in() {
    let o = omega(2, 1.5, 0.0);
    let t = RateRegime::select(&o, 2.0, f64::INFINITY, 2.0).unwrap();
    assert_eq!(t.tag, RegimeTag::T33);
    let got = t.rate(1024.0).unwrap();
    assert!((got - 10f64.powf(1.5) / 1024.0).abs() <= 1e-15);
    let t31 = RateRegime::select(&o, 2.0, 2.0, 2.0).unwrap();
    assert_eq!(t31.lambda, 1.5);
    assert_eq!(t31.rho, 1.5);
}
