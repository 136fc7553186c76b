use proptest::prelude::*;
use scri::geometry::*;
use scri::hamflow::*;

fn point(rho: f64, v: f64, y: Vec<f64>, xi: f64, gamma: f64, eta: Vec<f64>) -> CotangentPoint {
    CotangentPoint { rho, v, y, xi, gamma, eta }
}

fn equator() -> Vec<f64> {
    vec![std::f64::consts::FRAC_PI_2, 0.3]
}

/// Central differences of the symbol in every coordinate.
fn fd_gradient(model: &MetricModel, p: &CotangentPoint) -> Vec<f64> {
    let k = model.k();
    let lam = |q: &CotangentPoint| b_symbol(model, &q.base(), &q.fiber()).unwrap();
    let h = 1e-6;
    let mut out = Vec::new();
    for c in 0..(4 + 2 * k) {
        let bump = |s: f64| {
            let mut q = p.clone();
            match c {
                0 => q.rho += s,
                1 => q.v += s,
                c if c < 2 + k => q.y[c - 2] += s,
                c if c == 2 + k => q.xi += s,
                c if c == 3 + k => q.gamma += s,
                c => q.eta[c - 4 - k] += s,
            }
            q
        };
        out.push((lam(&bump(h)) - lam(&bump(-h))) / (2.0 * h));
    }
    out
}

fn assert_gradient(model: &MetricModel, p: &CotangentPoint) {
    let k = model.k();
    let g = fd_gradient(model, p);
    let h = hamilton_vector(model, p).unwrap();
    let mut pairs = vec![(h.rho_drho, g[2 + k]), (h.dv, g[3 + k]), (h.dxi, -p.rho * g[0]), (h.dgamma, -g[1])];
    for i in 0..k {
        pairs.push((h.dy[i], g[4 + k + i]));
        pairs.push((h.deta[i], -g[2 + i]));
    }
    let scale = pairs.iter().fold(1.0f64, |a, (x, _)| a.max(x.abs()));
    for (exact, fd) in pairs {
        assert!((exact - fd).abs() <= 1e-6 * scale, "{exact} vs {fd}");
    }
}

#[test]
fn hamilton_vector_examples() {
    let mink = make_minkowski();
    let h = hamilton_vector(&mink, &point(0.0, 0.0, equator(), 0.0, 1.0, vec![0.0, 0.0])).unwrap();
    assert!((h.rho_drho + 4.0).abs() < 1e-12);
    assert!(h.dv.abs() < 1e-12);

    let zero = hamilton_vector(&mink, &point(0.3, 0.1, equator(), 0.0, 0.0, vec![0.0, 0.0])).unwrap();
    assert!(zero.rho_drho == 0.0 && zero.dv == 0.0 && zero.dxi == 0.0 && zero.dgamma == 0.0);
    assert!(zero.dy.iter().chain(&zero.deta).all(|&c| c == 0.0));

    // Leading term 2 * 4m rho; the O(rho^2) correction is ~2 m^2 rho^2.
    let schw = make_kerr_exterior(1.0, 0.0).unwrap();
    let h = hamilton_vector(&schw, &point(0.01, 0.0, equator(), 0.0, 1.0, vec![0.0, 0.0])).unwrap();
    assert!((h.dv - 0.32).abs() < 5e-3, "{}", h.dv);

    assert!(hamilton_vector(&mink, &point(2.0, 0.0, equator(), 0.0, 1.0, vec![0.0, 0.0])).is_err());
}

#[test]
fn fiber_representations_agree() {
    let p = point(0.1, 0.2, equator(), 3.0, -4.0, vec![0.5, -1.5]);
    let q = p.compactified().unwrap();
    assert!((q.nu * p.gamma - 1.0).abs() < 1e-15);
    assert!((q.xi_hat * p.gamma - p.xi).abs() < 1e-15);
    for (eh, e) in q.eta_hat.iter().zip(&p.eta) {
        assert!((eh * p.gamma - e).abs() < 1e-15);
    }
    let back = q.expanded().unwrap();
    assert!((back.xi - p.xi).abs() < 1e-14 && (back.gamma - p.gamma).abs() < 1e-14);
    assert!(point(0.1, 0.2, equator(), 3.0, 0.0, vec![0.0, 0.0]).compactified().is_err());
}

#[test]
fn radial_distance_examples() {
    let d = |rho, v, xi| radial_distance(&point(rho, v, equator(), xi, 1.0, vec![0.0, 0.0])).unwrap();
    assert_eq!(d(0.0, 0.0, 0.0), 0.0);
    assert!((d(0.3, 0.4, 0.0) - 0.5).abs() < 1e-15);
    // A point of the incoming radial set: v = 0, eta = 0, gamma > 0.
    assert_eq!(radial_distance(&point(0.0, 0.0, equator(), 0.0, 7.0, vec![0.0, 0.0])).unwrap(), 0.0);
    assert!(radial_distance(&point(0.0, 0.0, equator(), 1.0, 0.0, vec![0.0, 0.0])).is_err());
}

#[test]
fn minkowski_null_datum_reaches_radial_set() {
    let mink = make_minkowski();
    let seed = (0..32).filter_map(|i| null_seed(&mink, i)).find(|s| s.v < 0.0).unwrap();
    let tol = 1e-3;
    let b = trace_bicharacteristic(&mink, &seed, 200.0, tol).unwrap();
    assert_eq!(b.termination, Termination::ReachedRadialSet);
    assert!(b.final_radial_distance().unwrap() < tol);
    assert!(b.max_abs_lambda() <= 10.0 * tol);
    let csv = b.to_csv(mink.k());
    assert!(csv.starts_with("param,rho,v,y0,y1,nu,xi_hat,eta_hat0,eta_hat1,lambda\n"));
    assert_eq!(csv.lines().count(), b.params.len() + 1);
}

#[test]
fn trace_edge_cases() {
    let mink = make_minkowski();
    let p0 = null_seed(&mink, 3).unwrap();
    let b = trace_bicharacteristic(&mink, &p0, 0.0, 1e-3).unwrap();
    assert_eq!(b.params.len(), 1);
    assert_eq!(b.points.len(), 1);

    let non_null = point(0.05, 0.0, equator(), 1.0, 0.0, vec![0.0, 0.0]);
    assert!((b_symbol(&mink, &non_null.base(), &non_null.fiber()).unwrap() - 1.0).abs() < 1e-12);
    assert!(matches!(trace_bicharacteristic(&mink, &non_null, 10.0, 1e-3), Err(scri::Error::Precondition(_))));
    let opts = TraceOptions { null: false, ..TraceOptions::default() };
    assert!(trace_bicharacteristic_with(&mink, &non_null, 1.0, &opts).is_ok());
}

#[test]
fn lambda_is_conserved_on_kerr() {
    let kerr = make_kerr_exterior(1.0, 0.7).unwrap();
    let tol = 1e-4;
    for i in 0..8 {
        let Some(p0) = null_seed(&kerr, i) else { continue };
        let b = trace_bicharacteristic(&kerr, &p0, 100.0, tol).unwrap();
        assert!(b.max_abs_lambda() <= 10.0 * tol, "seed {i}: {}", b.max_abs_lambda());
    }
}

fn assert_spectrum(r: &LinearizationReport, n: usize) {
    let size = 2 * n;
    assert_eq!(r.matrix.len(), size);
    let total: usize = r.clusters.iter().map(|c| c.algebraic).sum();
    assert_eq!(total, size);
    assert_eq!(r.clusters.len(), 3, "{:?}", r.clusters);
    for (value, mult) in [(-8.0, 1), (-4.0, n + 1), (0.0, n - 2)] {
        let c = r.cluster_near(value).unwrap();
        assert!((c.re - value).abs() < 1e-8 && c.im.abs() < 1e-8, "{value}: {c:?}");
        assert_eq!(c.algebraic, mult);
    }
    assert!(r.step_spread < 1e-6);
    for c in &r.checks {
        assert!(c.residual < 1e-8, "{} residual {}", c.name, c.residual);
    }
}

#[test]
fn minkowski_linearization() {
    for n in 3..=6 {
        let r = linearization(&make_minkowski_dim(n).unwrap()).unwrap();
        assert_spectrum(&r, n);
        assert!(!r.jordan_block);
        let c = r.cluster_near(-4.0).unwrap();
        assert_eq!(c.geometric, c.algebraic);
    }
}

#[test]
fn kerr_linearization_has_jordan_block() {
    for (mass, spin) in [(1.0, 0.0), (1.0, 0.5), (0.25, 0.1)] {
        let model = make_kerr_exterior(mass, spin).unwrap();
        let r = linearization(&model).unwrap();
        assert_spectrum(&r, 4);
        assert!(r.jordan_block);
        let c = r.cluster_near(-4.0).unwrap();
        assert_eq!(c.geometric + 1, c.algebraic);
        // drho is the left eigenvector closing the chain started by dxi_hat.
        let a = &r.matrix;
        assert!((a[3][0] + 4.0 * model.m).abs() < 1e-8);
        assert!(r.angular_coefficient.iter().all(|c| c.is_finite()));
    }
}

#[test]
fn normal_form_linearization_tracks_m() {
    for m in [0.0, 0.3, -1.5] {
        let model = make_normal_form(4, m, 1.0, 2.0, 4.0, vec![0.0; 2], vec![0.0; 2], None, vec![]).unwrap();
        let r = linearization(&model).unwrap();
        assert_spectrum(&r, 4);
        assert_eq!(r.jordan_block, m != 0.0);
    }
}

#[test]
fn nontrapping_minkowski() {
    let r = check_nontrapping(&make_minkowski(), 64, 200.0, 1e-3);
    assert_eq!(r.outcomes.len(), 64);
    assert_eq!(r.reached, 64, "{:?}", r.outcomes.iter().filter(|o| !o.classified()).collect::<Vec<_>>());
    assert!(r.passed());
}

#[test]
fn nontrapping_schwarzschild_classified() {
    let r = check_nontrapping(&make_kerr_exterior(1.0, 0.0).unwrap(), 32, 200.0, 1e-3);
    assert_eq!(r.unclassified, 0, "{:?}", r.outcomes.iter().filter(|o| !o.classified()).collect::<Vec<_>>());
    assert!(r.passed());
}

#[test]
fn nontrapping_zero_horizon() {
    let r = check_nontrapping(&make_minkowski(), 16, 0.0, 1e-3);
    assert_eq!(r.unclassified, 16);
    assert!(!r.passed());
}

#[test]
fn null_seeds_are_null_and_deterministic() {
    let kerr = make_kerr_exterior(0.5, 0.3).unwrap();
    for i in 0..32 {
        let p = null_seed(&kerr, i).unwrap();
        assert_eq!(null_seed(&kerr, i), Some(p.clone()));
        assert!(normalized_symbol(&kerr, &p.base(), &p.fiber()).abs() < 1e-12);
        assert!(kerr.in_chart(&p.base()));
    }
}

proptest! {
    #[test]
    fn gradient_check_minkowski(rho in 0.0f64..0.8, v in -0.5f64..0.5, th in 0.5f64..2.6, ph in 0.0f64..6.0,
                                xi in -3.0f64..3.0, ga in -3.0f64..3.0, e1 in -2.0f64..2.0, e2 in -2.0f64..2.0) {
        assert_gradient(&make_minkowski(), &point(rho, v, vec![th, ph], xi, ga, vec![e1, e2]));
    }

    #[test]
    fn gradient_check_kerr(rho in 0.0f64..0.1, v in -0.5f64..0.5, th in 0.5f64..2.6, ph in 0.0f64..6.0,
                           xi in -3.0f64..3.0, ga in -3.0f64..3.0, e1 in -2.0f64..2.0, e2 in -2.0f64..2.0,
                           spin in -0.9f64..0.9) {
        let kerr = make_kerr_exterior(1.0, spin).unwrap();
        assert_gradient(&kerr, &point(rho, v, vec![th, ph], xi, ga, vec![e1, e2]));
    }

    #[test]
    fn linearization_independent_of_sphere_point(th in 0.5f64..2.6, ph in 0.0f64..6.0) {
        let kerr = make_kerr_exterior(1.0, 0.4).unwrap();
        let r = linearization_at(&kerr, &[th, ph]).unwrap();
        let c = r.cluster_near(-8.0).unwrap();
        prop_assert!((c.re + 8.0).abs() < 1e-8);
        prop_assert!(r.check("dv + dxi_hat - m drho").unwrap() < 1e-8);
    }
}
