use num_complex::Complex64;
use proptest::prelude::*;

use hypercross::approx::{approx_error, project_q};
use hypercross::extremal::ks_vector;
use hypercross::indexsets::{chi, rho, theta, DyadicIndex};
use hypercross::kernels::a_band_multiplier;
use hypercross::majorant::MajorantParams;
use hypercross::trigpoly::{lp_norm, text, QuadratureSpec, TrigPolynomial};

fn nonzero() -> impl Strategy<Value = i64> {
    prop_oneof![-40i64..=-1, 1i64..=40]
}

fn poly(d: usize) -> impl Strategy<Value = TrigPolynomial> {
    prop::collection::vec(
        (prop::collection::vec(nonzero(), d), -1.0f64..1.0, -1.0f64..1.0),
        1..24,
    )
    .prop_map(move |terms| {
        TrigPolynomial::from_terms(d, terms.into_iter().map(|(k, re, im)| (k, Complex64::new(re, im)))).unwrap()
    })
}

fn omega2() -> impl Strategy<Value = MajorantParams> {
    (0.5f64..2.0, -0.5f64..0.5, -0.5f64..0.5)
        .prop_map(|(r, b1, b2)| MajorantParams::new(2, r, vec![b1.min(r - 0.1), b2.min(r - 0.1)], 3).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn projection_is_idempotent_linear_contraction(
        f in poly(2), g in poly(2), omega in omega2(), e in 2.0f64..10.0
    ) {
        let n = e.exp2();
        let pf = project_q(&f, &omega, n);
        prop_assert_eq!(project_q(&pf, &omega, n), pf.clone());
        prop_assert!(pf.l2_norm_sq() <= f.l2_norm_sq() * (1.0 + 1e-15));
        let sum = f.add(&g).unwrap();
        let lhs = project_q(&sum, &omega, n);
        let rhs = pf.add(&project_q(&g, &omega, n)).unwrap();
        prop_assert!(lhs.sub(&rhs).unwrap().l2_norm_sq() <= 1e-24);
        let tail: f64 = f.iter().filter(|(k, _)| pf.coeff(k) == Complex64::new(0.0, 0.0)).map(|(_, c)| c.norm_sqr()).sum();
        let err = approx_error(&f, &omega, n, 2.0, &QuadratureSpec::default()).unwrap();
        prop_assert!((err * err - tail).abs() <= 1e-12 * tail.max(1e-300));
    }

    #[test]
    fn error_is_monotone_in_n(f in poly(2), omega in omega2(), e in 2.0f64..9.0) {
        let quad = QuadratureSpec::default();
        let a = approx_error(&f, &omega, e.exp2(), 2.0, &quad).unwrap();
        let b = approx_error(&f, &omega, (e + 1.0).exp2(), 2.0, &quad).unwrap();
        prop_assert!(b <= a * (1.0 + 1e-12));
    }

    #[test]
    fn error_commutes_with_translation(
        f in poly(2), omega in omega2(), e in 2.0f64..9.0, y1 in 0.0f64..6.3, y2 in 0.0f64..6.3
    ) {
        let n = e.exp2();
        let quad = QuadratureSpec::default();
        let shifted = f.translate(&[y1, y2]).unwrap();
        for q in [1.0, 2.0, 4.0] {
            let a = approx_error(&f, &omega, n, q, &quad).unwrap();
            let b = approx_error(&shifted, &omega, n, q, &quad).unwrap();
            // adaptive stopping compares successive grids, so allow a margin over rel_tol
            prop_assert!((a - b).abs() <= 1e-4 * a.max(1e-12), "q={} {} vs {}", q, a, b);
        }
    }

    #[test]
    fn parseval_on_the_grid(f in poly(1)) {
        let grid = QuadratureSpec { mode: hypercross::trigpoly::QuadratureMode::EvenPowerExact, ..QuadratureSpec::default() };
        let a = lp_norm(&f, 2.0, &grid).unwrap().powi(2);
        prop_assert!((a - f.l2_norm_sq()).abs() <= 1e-10 * f.l2_norm_sq());
    }

    #[test]
    fn norms_increase_with_p(f in poly(2)) {
        let quad = QuadratureSpec::with_rel_tol(1e-5);
        let mut last = 0.0;
        for p in [1.0, 1.5, 2.0, 4.0, f64::INFINITY] {
            let v = lp_norm(&f, p, &quad).unwrap();
            prop_assert!(v >= last * (1.0 - 1e-4), "p={} {} < {}", p, v, last);
            last = v;
        }
        prop_assert!(last <= f.sum_abs_coeffs() * (1.0 + 1e-12));
    }

    #[test]
    fn text_format_round_trips(f in poly(3)) {
        let back = text::parse(&text::write(&f, &["note".to_string()])).unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn shell_relations(omega in omega2(), e in 1.0f64..12.0) {
        let n = e.exp2();
        let c = chi(&omega, n).unwrap();
        let t = theta(&omega, n).unwrap();
        let c_big = chi(&omega, 2.0 * n).unwrap();
        let c_outer = chi(&omega, n * (omega.l as f64).exp2()).unwrap();
        for s in c.iter() {
            prop_assert!(c_big.contains(s));
        }
        for s in t.iter() {
            prop_assert!(!c.contains(s));
            prop_assert!(c_outer.contains(s));
        }
    }

    #[test]
    fn ks_lies_in_its_block(s in prop::collection::vec(1u32..20, 1..4)) {
        let idx = DyadicIndex::new(s).unwrap();
        prop_assert!(idx.contains(&ks_vector(&idx)));
        prop_assert_eq!(rho(&idx).len(), 1u128 << idx.l1());
    }

    #[test]
    fn band_multipliers_sum_to_one(k in prop::collection::vec(nonzero(), 2)) {
        let mut total = 0.0;
        for s1 in 1..=8u32 {
            for s2 in 1..=8u32 {
                total += a_band_multiplier(&DyadicIndex::new(vec![s1, s2]).unwrap(), &k);
            }
        }
        prop_assert_eq!(total, 1.0);
    }
}
