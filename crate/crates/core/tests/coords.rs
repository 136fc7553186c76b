use num_complex::Complex64;
use num_rational::Rational64;
use proptest::prelude::*;
use scri::coords::*;
use scri::indexsets::{Exponent, IndexEntry, IndexSet};

fn chi() -> CutoffSpec {
    CutoffSpec::default()
}

#[test]
fn cutoff_profile() {
    let c = chi();
    assert_eq!(c.value(0.0), 1.0);
    assert_eq!(c.value(0.25), 1.0);
    assert_eq!(c.value(-0.2), 1.0);
    assert_eq!(c.value(0.75), 0.0);
    assert_eq!(c.value(-3.0), 0.0);
    assert!((c.value(0.5) - 0.5).abs() < 1e-15);
    assert!(CutoffSpec::new(0.5, 0.5).is_err());
    assert!(CutoffSpec::new(0.0, 1.0).is_err());
    let mut max = 0.0f64;
    for i in 0..=2000 {
        let x = -1.0 + i as f64 * 1e-3;
        let v = c.value(x);
        assert!((0.0..=1.0).contains(&v));
        let h = 1e-6;
        let fd = (c.value(x + h) - c.value(x - h)) / (2.0 * h);
        assert!((fd - c.derivative(x)).abs() < 1e-6, "{x}: {fd} vs {}", c.derivative(x));
        max = max.max(c.derivative(x).abs());
    }
    assert!(max <= c.max_slope() + 1e-12);
    assert!((max - c.max_slope()).abs() < 1e-3);
}

#[test]
fn logify_examples() {
    let c = chi();
    assert_eq!(logify_point(0.0, 0.3, 1.0, &c).unwrap(), (0.0, 0.3));
    for (rho, v) in [(0.1, 0.2), (0.5, -0.4), (1e-3, 0.0)] {
        assert_eq!(logify_point(rho, v, 0.0, &c).unwrap(), (rho, v));
        assert_eq!(unlogify_point(rho, v, 0.0, &c).unwrap(), (rho, v));
    }
    let e = (-1.0f64).exp();
    let (_, vb) = logify_point(e, 0.0, 1.0, &c).unwrap();
    assert!((vb + e).abs() < 1e-15);
    assert!(logify_point(-0.1, 0.0, 1.0, &c).is_err());
    assert_eq!(logify_point(0.1, 0.9, 2.0, &c).unwrap(), (0.1, 0.9));
    assert_eq!(unlogify_point(0.0, 0.4, 3.0, &c).unwrap(), (0.0, 0.4));
}

#[test]
fn unlogify_rejects_non_monotone_region() {
    let c = chi();
    // |m rho log rho| * 4 >= 1 at rho = 0.2, m = 2.
    assert!(matches!(unlogify_point(0.2, 0.0, 2.0, &c), Err(scri::Error::Precondition(_))));
}

#[test]
fn blowup_reconstruction() {
    let p = BlowupPoint::from_logified(0.037, -0.81, vec![1.0, 2.0]).unwrap();
    assert_eq!(p.v_bar(), p.s * p.rho_bar);
    assert!((p.v_bar() + 0.81).abs() < 1e-16);
    assert!((p.varpi().unwrap() - 0.037 / -0.81).abs() < 1e-15);
    assert!(BlowupPoint::from_logified(0.0, 0.1, vec![]).is_err());
    assert_eq!(BlowupPoint { s: 0.0, rho_bar: 0.1, y: vec![] }.varpi(), None);
}

#[test]
fn lift_examples() {
    let c = chi();
    let m = 1.7;
    let at0 = lift_module_generator(Generator::RhoDRho, m, c).at(0.3, 0.01, 0.0);
    assert!((at0.log_ds - m).abs() < 1e-15);
    // Outside the ramp chi' = 0 and chi = 0.
    let far = lift_module_generator(Generator::VDv, m, c).at(50.0, 0.01, 0.9);
    assert_eq!(far.log_ds, 0.0);
    // On the plateau chi' = 0 but chi = 1: the log coefficient is -chi m.
    let plateau = lift_module_generator(Generator::VDv, m, c).at(3.0, 0.01, 0.1);
    assert!((plateau.log_ds + m).abs() < 1e-15);
    for g in [Generator::RhoDRho, Generator::VDv, Generator::RhoDv] {
        let l = lift_module_generator(g, 0.0, c);
        for v in [0.0, 0.4, 0.6] {
            assert_eq!(l.at(1.0, 0.05, v).log_ds, 0.0);
            assert_eq!(l.at(1.0, 0.05, v).rho_log_drho, 0.0);
        }
    }
}

fn test_fn(rho: f64, v: f64) -> f64 {
    (2.0 * v).sin() + rho * rho * v + (rho + 0.3 * v).exp()
}

/// Check the lift against the chain rule at `(rho, v)`.
fn chain_rule_residual(g: Generator, m: f64, rho: f64, v: f64) -> f64 {
    let c = chi();
    let h = 1e-5;
    let target = match g {
        Generator::RhoDRho => rho * (test_fn(rho + h, v) - test_fn(rho - h, v)) / (2.0 * h),
        Generator::VDv => v * (test_fn(rho, v + h) - test_fn(rho, v - h)) / (2.0 * h),
        Generator::RhoDv => rho * (test_fn(rho, v + h) - test_fn(rho, v - h)) / (2.0 * h),
    };
    let lifted = |s: f64, rb: f64| {
        let (_, vv) = unlogify_point(rb, s * rb, m, &c).unwrap();
        test_fn(rb, vv)
    };
    let (_, vb) = logify_point(rho, v, m, &c).unwrap();
    let p = BlowupPoint::from_logified(rho, vb, vec![]).unwrap();
    let hs = 1e-5 * p.s.abs().max(1.0);
    let hr = 1e-5 * rho;
    let df_ds = (lifted(p.s + hs, rho) - lifted(p.s - hs, rho)) / (2.0 * hs);
    let df_dr = (lifted(p.s, rho + hr) - lifted(p.s, rho - hr)) / (2.0 * hr);
    let coeffs = lift_module_generator(g, m, c).at_point(&p).unwrap();
    (coeffs.apply(rho, df_ds, df_dr) - target).abs() / target.abs().max(1.0)
}

#[test]
fn lifts_agree_with_chain_rule_on_ramp() {
    for g in [Generator::RhoDRho, Generator::VDv, Generator::RhoDv] {
        for v in [0.1, 0.35, 0.5, -0.6] {
            let r = chain_rule_residual(g, 1.3, 0.02, v);
            assert!(r < 1e-6, "{g:?} at v = {v}: {r}");
        }
    }
}

#[test]
fn synth_phg_examples() {
    let one = IndexSet::from_entries([IndexEntry::new(Exponent::neg_imag(0), 0)], 0.5);
    let g = synth_phg(&one, |_, _| Complex64::new(1.0, 0.0), &[0.1, 0.5], &[0.0, 2.0]);
    assert!(g.iter().flatten().all(|z| (*z - 1.0).norm() < 1e-15));

    let e = IndexSet::from_entries([IndexEntry::new(Exponent::neg_imag(1), 2)], 1.5);
    assert_eq!(e.len(), 3);
    let coef = |en: &IndexEntry, _| Complex64::new(if en.k == 2 { 1.0 } else { 0.0 }, 0.0);
    for rho in [1e-3, 0.2, 0.7] {
        let val = phg_value(&e, &coef, rho, 0.0);
        let exact = rho * rho.ln().powi(2);
        assert!((val.re - exact).abs() < 1e-15 && val.im.abs() < 1e-15);
    }

    let z = Exponent::exact(Rational64::new(1, 2), Rational64::new(-1, 3));
    let t = phg_term(&IndexEntry::new(z, 1), 0.25);
    let expect = Complex64::new(0.25f64, 0.0).powc(Complex64::i() * Complex64::new(0.5, -1.0 / 3.0)) * 0.25f64.ln();
    assert!((t - expect).norm() < 1e-14);
}

proptest! {
    #[test]
    fn logify_round_trip(rho in 0.0f64..0.03, v in -1.0f64..1.0, m in -2.0f64..2.0) {
        let c = chi();
        let (rb, vb) = logify_point(rho, v, m, &c).unwrap();
        let (r2, v2) = unlogify_point(rb, vb, m, &c).unwrap();
        prop_assert_eq!(r2, rho);
        prop_assert!((v2 - v).abs() < 1e-10);
    }

    #[test]
    fn logify_identity_outside_support(rho in 0.0f64..1.0, v in 0.75f64..3.0, m in -5.0f64..5.0) {
        let c = chi();
        prop_assert_eq!(logify_point(rho, v, m, &c).unwrap(), (rho, v));
        prop_assert_eq!(logify_point(rho, -v, m, &c).unwrap(), (rho, -v));
        prop_assert_eq!(logify_point(0.0, v * 0.1, m, &c).unwrap(), (0.0, v * 0.1));
    }

    #[test]
    fn lift_chain_rule(rho in 0.002f64..0.04, v in -0.9f64..0.9, m in -1.5f64..1.5) {
        for g in [Generator::RhoDRho, Generator::VDv, Generator::RhoDv] {
            prop_assert!(chain_rule_residual(g, m, rho, v) < 1e-5);
        }
    }

    #[test]
    fn blowup_exact(rb in 1e-6f64..1.0, vb in -2.0f64..2.0) {
        let p = BlowupPoint::from_logified(rb, vb, vec![]).unwrap();
        prop_assert!((p.v_bar() - vb).abs() <= 4.0 * f64::EPSILON * vb.abs());
    }
}
