use proptest::prelude::*;
use scri::geometry::*;

/// Boyer-Lindquist inverse metric, signature (+,-,-,-), pulled back to the
/// scattering frame of `rho = 1/t`, `v = 1 - r^2/t^2` by hand.
fn kerr_oracle(mass: f64, a: f64, rho: f64, v: f64, th: f64) -> [[f64; 4]; 4] {
    let t = 1.0 / rho;
    let r = (1.0 - v).sqrt() * t;
    let (s, c) = th.sin_cos();
    let sigma = r * r + a * a * c * c;
    let delta = r * r - 2.0 * mass * r + a * a;
    let gtt = ((r * r + a * a).powi(2) - a * a * delta * s * s) / (sigma * delta);
    let gtp = 2.0 * mass * a * r / (sigma * delta);
    let gpp = -(delta - a * a * s * s) / (sigma * delta * s * s);
    let grr = -delta / sigma;
    let gthth = -1.0 / sigma;
    // Coordinate differentials: d rho = -rho^2 dt, dv = 2 r^2 rho^3 dt - 2 r rho^2 dr.
    let drho = [-rho * rho, 0.0];
    let dv = [2.0 * r * r * rho.powi(3), -2.0 * r * rho * rho];
    let g2 = |x: [f64; 2], y: [f64; 2]| x[0] * y[0] * gtt + x[1] * y[1] * grr;
    let mut g = [[0.0; 4]; 4];
    g[0][0] = g2(drho, drho) / rho.powi(4);
    g[0][1] = g2(drho, dv) / rho.powi(3);
    g[1][1] = g2(dv, dv) / rho.powi(2);
    g[0][3] = drho[0] * gtp / rho.powi(3);
    g[1][3] = dv[0] * gtp / rho.powi(2);
    g[2][2] = gthth / rho.powi(2);
    g[3][3] = gpp / rho.powi(2);
    for i in 0..4 {
        for j in 0..i {
            g[i][j] = g[j][i];
        }
    }
    g
}

#[test]
fn kerr_matches_boyer_lindquist_oracle() {
    for &(mass, a) in &[(1.0, 0.0), (1.0, 0.5), (0.25, 0.1), (0.5, 0.45)] {
        let model = make_kerr_exterior(mass, a).unwrap();
        for &rho in &[0.01, 0.05, model.chart.rho_max] {
            for &v in &[-0.6, -0.1, 0.0, 0.3, 0.8] {
                for &th in &[0.4, 1.2, 2.5] {
                    let p = BasePoint::new(rho, v, vec![th, 0.7]);
                    let g = dual_metric_matrix(&model, &p).unwrap();
                    let o = kerr_oracle(mass, a, rho, v, th);
                    for i in 0..4 {
                        for j in 0..4 {
                            let scale = 1.0 + o[i][j].abs();
                            assert!(
                                (g[(i, j)] - o[i][j]).abs() < 1e-12 * scale,
                                "M={mass} a={a} rho={rho} v={v} th={th} ({i},{j}): {} vs {}",
                                g[(i, j)],
                                o[i][j]
                            );
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn kerr_boundary_constants() {
    for &(mass, a) in &[(1.0, 0.0), (1.0, 0.5), (0.25, 0.1)] {
        let model = make_kerr_exterior(mass, a).unwrap();
        let rep = validate_model(&model).unwrap();
        let c = &rep.constants;
        assert!((c.omega - 1.0).abs() < 1e-10);
        assert!((c.alpha - 2.0).abs() < 1e-10);
        assert!((c.beta - 4.0).abs() < 1e-10);
        assert!((c.m - 4.0 * mass).abs() < 1e-10);
        assert!(c.mu.iter().chain(c.upsilon.iter()).all(|x| x.abs() < 1e-10));
        assert!(rep.passed(), "{:#?}", rep.checks);
    }
}

#[test]
fn minkowski_is_valid_in_all_dimensions() {
    for n in 3..=6 {
        let model = make_minkowski_dim(n).unwrap();
        let rep = validate_model(&model).unwrap();
        assert!(rep.passed(), "n={n}: {:#?}", rep.checks);
        assert_eq!(rep.constants.m, 0.0);
        assert!((rep.constants.log_combination() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn schwarzschild_mass_term_and_small_mass_limit() {
    let model = make_kerr_exterior(1.0, 0.0).unwrap();
    let g = dual_metric_matrix(&model, &BasePoint::new(0.01, 0.0, vec![1.0, 0.0])).unwrap();
    // G^{vv} = 4 m rho + O(rho^2) with an O(1) multiple of (m rho)^2.
    assert!((g[(1, 1)] - 0.16).abs() < 2e-3);
    let tiny = make_kerr_exterior(1e-9, 0.0).unwrap();
    let flat = make_minkowski();
    let p = BasePoint::new(0.0, 0.0, vec![1.0, 0.3]);
    let (a, b) = (dual_metric_matrix(&tiny, &p).unwrap(), dual_metric_matrix(&flat, &p).unwrap());
    assert!((a - b).amax() < 1e-12);
}

#[test]
fn corner_symbol_values() {
    let model = make_minkowski();
    let p = BasePoint::new(0.0, 0.0, vec![1.0, 0.0]);
    assert_eq!(b_symbol(&model, &p, &[1.0, 0.0, 0.0, 0.0]).unwrap(), 1.0);
    assert_eq!(b_symbol(&model, &p, &[1.0, 1.0, 0.0, 0.0]).unwrap(), -3.0);
    assert_eq!(b_symbol(&model, &p, &[0.0, 1.0, 0.0, 0.0]).unwrap(), 0.0);
    assert_eq!(b_symbol(&model, &p, &[0.0; 4]).unwrap(), 0.0);
}

#[test]
fn minkowski_is_flat_space_in_the_chart() {
    let model = make_minkowski();
    let p = BasePoint::new(0.2, 0.3, vec![1.1, 0.4]);
    let g = dual_metric_matrix(&model, &p).unwrap();
    assert!((g[(0, 0)] - 1.0).abs() < 1e-15);
    assert!((g[(0, 1)] + 2.0 * 0.7).abs() < 1e-15);
    assert!((g[(1, 1)] + 4.0 * 0.3 * 0.7).abs() < 1e-15);
    assert!((g[(2, 2)] + 1.0 / 0.7).abs() < 1e-14);
    assert!((g[(3, 3)] + 1.0 / (0.7 * 1.1f64.sin().powi(2))).abs() < 1e-13);
}

#[test]
fn broken_remainder_is_flagged() {
    let bad = PolyRemainder { slot: SlotSpec::VV, coef: 0.3, rho_pow: 0, v_pow: 1 };
    let spec = ModelSpec::NormalForm {
        n: 4,
        m: 1.0,
        omega: 1.0,
        alpha: 2.0,
        beta: 4.0,
        mu: vec![],
        upsilon: vec![],
        h_inv: None,
        remainders: vec![bad],
    };
    let rep = validate_model(&spec.build().unwrap()).unwrap();
    let c = rep.checks.iter().find(|c| c.name == "remainder vanishing order").unwrap();
    assert!(!c.passed);
}

#[test]
fn indefinite_sphere_metric_is_flagged() {
    let spec = ModelSpec::NormalForm {
        n: 4,
        m: 0.0,
        omega: 1.0,
        alpha: 2.0,
        beta: 4.0,
        mu: vec![],
        upsilon: vec![],
        h_inv: Some(vec![vec![1.0, 0.0], vec![0.0, -1.0]]),
        remainders: vec![],
    };
    let rep = validate_model(&spec.build().unwrap()).unwrap();
    assert!(!rep.checks[0].passed);
}

#[test]
fn invalid_parameters_and_points() {
    assert!(make_kerr_exterior(-1.0, 0.0).is_err());
    assert!(make_kerr_exterior(1.0, 1.5).is_err());
    assert!(make_kerr_exterior(1.0, 1.0).is_err());
    assert!(make_kerr_exterior(0.0, 0.0).is_err());
    assert!(make_minkowski_dim(2).is_err());
    let model = make_minkowski();
    assert!(dual_metric_matrix(&model, &BasePoint::new(-0.1, 0.0, vec![1.0, 0.0])).is_err());
    assert!(dual_metric_matrix(&model, &BasePoint::new(0.1, 0.95, vec![1.0, 0.0])).is_err());
    assert!(dual_metric_matrix(&model, &BasePoint::new(0.1, 0.0, vec![0.05, 0.0])).is_err());
    assert!(b_symbol(&model, &BasePoint::new(0.1, 0.0, vec![1.0, 0.0]), &[1.0, 2.0]).is_err());
}

#[test]
fn model_spec_round_trips_through_toml() {
    let specs = vec![
        ModelSpec::Minkowski { n: 5 },
        ModelSpec::Kerr { mass: 0.7, spin: 0.2 },
        ModelSpec::NormalForm {
            n: 4,
            m: 0.5,
            omega: 1.5,
            alpha: 1.0,
            beta: 3.0,
            mu: vec![0.1, 0.0],
            upsilon: vec![0.0, 0.2],
            h_inv: Some(vec![vec![1.0, 0.1], vec![0.1, 2.0]]),
            remainders: vec![PolyRemainder { slot: SlotSpec::YY { i: 0, j: 1 }, coef: 0.5, rho_pow: 1, v_pow: 0 }],
        },
    ];
    for s in specs {
        let text = s.to_toml();
        let back = ModelSpec::from_toml(&text).unwrap();
        assert_eq!(back, s);
        let (a, b) = (s.build().unwrap(), back.build().unwrap());
        let p = BasePoint::new(0.05, 0.1, vec![1.0; a.k()]);
        assert_eq!(dual_metric_matrix(&a, &p).unwrap(), dual_metric_matrix(&b, &p).unwrap());
    }
}

proptest! {
    #[test]
    fn mass_does_not_enter_at_rho_zero(
        v in -0.5f64..0.5, xi in -2.0f64..2.0, ga in -2.0f64..2.0, e1 in -2.0f64..2.0, e2 in -2.0f64..2.0,
    ) {
        let build = |m: f64| ModelSpec::NormalForm {
            n: 4, m, omega: 1.0, alpha: 2.0, beta: 4.0, mu: vec![], upsilon: vec![], h_inv: None, remainders: vec![],
        }.build().unwrap();
        let p = BasePoint::new(0.0, v, vec![1.2, 0.4]);
        let f = [xi, ga, e1, e2];
        let d = (b_symbol(&build(1.0 + 1e-4), &p, &f).unwrap() - b_symbol(&build(1.0 - 1e-4), &p, &f).unwrap()) / 2e-4;
        prop_assert!(d.abs() < 1e-10);
    }

    #[test]
    fn symbol_agrees_with_coordinate_frame(
        rho in 0.001f64..0.1, v in -0.8f64..0.8, th in 0.3f64..2.8, ph in 0.0..std::f64::consts::TAU,
        xi in -3.0f64..3.0, ga in -3.0f64..3.0, e1 in -3.0f64..3.0, e2 in -3.0f64..3.0,
    ) {
        let model = make_kerr_exterior(1.0, 0.6).unwrap();
        let p = BasePoint::new(rho, v, vec![th, ph]);
        let lam = b_symbol(&model, &p, &[xi, ga, e1, e2]).unwrap();
        let g = coordinate_dual_metric(&model, &p).unwrap();
        let c = [xi / (rho * rho), ga / rho, e1 / rho, e2 / rho];
        let mut q = 0.0;
        for i in 0..4 { for j in 0..4 { q += c[i] * g[(i, j)] * c[j]; } }
        prop_assert!((q - lam).abs() <= 1e-9 * (1.0 + lam.abs()));
    }

    #[test]
    fn symbol_is_quadratic_in_the_fiber(
        rho in 0.0f64..0.1, v in -0.5f64..0.5, th in 0.5f64..2.5,
        xi in -2.0f64..2.0, ga in -2.0f64..2.0, e1 in -2.0f64..2.0, e2 in -2.0f64..2.0, s in -4.0f64..4.0,
    ) {
        let model = make_kerr_exterior(0.5, 0.3).unwrap();
        let p = BasePoint::new(rho, v, vec![th, 0.3]);
        let a = b_symbol(&model, &p, &[xi, ga, e1, e2]).unwrap();
        let b = b_symbol(&model, &p, &[s * xi, s * ga, s * e1, s * e2]).unwrap();
        prop_assert!((b - s * s * a).abs() <= 1e-10 * (1.0 + b.abs()));
    }

    #[test]
    fn dual_metric_is_symmetric(rho in 0.0f64..0.5, v in -0.5f64..0.5, th in 0.3f64..2.8) {
        let model = make_minkowski();
        let g = dual_metric_matrix(&model, &BasePoint::new(rho, v, vec![th, 1.0])).unwrap();
        prop_assert_eq!(g.clone(), g.transpose());
    }
}
