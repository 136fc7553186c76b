use proptest::prelude::*;
use scri::solver::*;
use scri::Error;

fn grid(dr: f64, t_end: f64) -> GridSpec {
    GridSpec { dr, t_end, ..GridSpec::default() }
}

fn probes(points: &[(f64, f64)]) -> Vec<ProbePoint> {
    points.iter().map(|&(t, r_star)| ProbePoint { t, r_star }).collect()
}

fn max_error(dr: f64, points: &[(f64, f64)], exact: &[f64]) -> f64 {
    let src = SourceSpec::default();
    let sol = solve_forward(&reduce_radial(0.0).unwrap(), &src, &grid(dr, 0.0), &probes(points)).unwrap();
    sol.probe_psi
        .iter()
        .zip(points)
        .zip(exact)
        .map(|((psi, (_, r)), u)| (psi / r - u).abs())
        .fold(0.0, f64::max)
}

#[test]
fn zero_source_gives_zero_field() {
    let src = SourceSpec { amplitude: 0.0, ..SourceSpec::default() };
    for mass in [0.0, 0.5] {
        let g = GridSpec { frame_every: 50, ..grid(1.0 / 8.0, 30.0) };
        let sol = solve_forward(&reduce_radial(mass).unwrap(), &src, &g, &probes(&[(20.0, 15.0)])).unwrap();
        assert_eq!(sol.max_abs_psi(), 0.0);
    }
}

#[test]
fn oracle_matches_a_hand_checked_value() {
    let src = SourceSpec::default();
    // Before any signal can arrive the field vanishes.
    let u = exact_minkowski_oracle(&src, &[(-10.0, 10.0), (0.0, 30.0), (10.0, 10.0)]).unwrap();
    assert_eq!(u[0], 0.0);
    assert_eq!(u[1], 0.0);
    assert!(u[2].abs() > 1e-3);
    assert!((u[2] - minkowski_psi(&src, 10.0, 10.0) / 10.0).abs() < 1e-15);
    // Linear in the amplitude.
    let twice = SourceSpec { amplitude: 2.0, ..src };
    let v = exact_minkowski_oracle(&twice, &[(10.0, 10.0)]).unwrap();
    assert!((v[0] - 2.0 * u[2]).abs() < 1e-10 * u[2].abs(), "{} vs {}", v[0], 2.0 * u[2]);
    assert!(exact_minkowski_oracle(&src, &[(1.0, 0.0)]).is_err());
}

#[test]
fn second_order_convergence_to_the_exact_solution() {
    let points: Vec<(f64, f64)> = (0..9).map(|i| (25.0, 4.0 + 3.0 * i as f64)).collect();
    let exact = exact_minkowski_oracle(&SourceSpec::default(), &points).unwrap();
    let errs: Vec<f64> = [1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0].iter().map(|&dr| max_error(dr, &points, &exact)).collect();
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order >= 1.9, "order {order} from errors {errs:?}");
    }
}

#[test]
fn potential_and_lapse() {
    let m = reduce_radial(1.0).unwrap();
    assert!((m.potential(4.0) - 1.0 / 64.0).abs() < 1e-16);
    assert_eq!(m.lapse(4.0), 0.5);
    assert_eq!(m.m(), 4.0);
    assert_eq!(reduce_radial(0.0).unwrap().potential(3.0), 0.0);
    assert!(reduce_radial(-1.0).is_err());
}

proptest! {
    #[test]
    fn tortoise_round_trip(mass in 0.05f64..5.0, x in 0.0f64..1.0) {
        let m = reduce_radial(mass).unwrap();
        let r = 3.0 * mass * (1e4f64 / 3.0).powf(x);
        let back = m.r_of_tortoise(m.tortoise(r).unwrap()).unwrap();
        prop_assert!((back - r).abs() <= 1e-10 * r);
    }
}

#[test]
fn courant_above_one_is_rejected() {
    let g = GridSpec { courant: 1.1, ..grid(0.1, 10.0) };
    let r = solve_forward(&reduce_radial(0.0).unwrap(), &SourceSpec::default(), &g, &[]);
    assert!(matches!(r, Err(Error::Cfl(_))));
}

#[test]
fn signals_travel_at_unit_speed() {
    let src = SourceSpec::default();
    let dr = 1.0 / 8.0;
    let g = GridSpec { frame_every: 40, moving_window: false, ..grid(dr, 30.0) };
    let sol = solve_forward(&reduce_radial(0.0).unwrap(), &src, &g, &[]).unwrap();
    let (t_start, _) = src.t_support();
    let (_, r_hi) = src.r_support();
    assert!(sol.frames.len() > 3);
    for f in &sol.frames {
        let front = r_hi + (f.t - t_start) + dr;
        for (i, p) in f.psi.iter().enumerate() {
            if sol.r_star(f.first_cell + i) > front {
                assert_eq!(*p, 0.0, "nonzero ahead of the light cone at t = {}", f.t);
            }
        }
    }
}

fn tortoise_slices(mass: f64, s: &[f64], rho_min: f64, rho_max: f64) -> Vec<NullSlice> {
    let model = reduce_radial(mass).unwrap();
    let src = SourceSpec::default();
    let g = grid(1.0 / 16.0, 0.0);
    let plan =
        plan_null_slices(&model, &src, &g, NullChart::Tortoise, s, &RhoSchedule::spanning(rho_min, rho_max, 4)).unwrap();
    let sol = solve_forward(&model, &src, &g, &plan.probes()).unwrap();
    extract_null_slices(&sol, &plan).unwrap()
}

#[test]
fn minkowski_radiation_field_is_constant_along_outgoing_rays() {
    let slices = tortoise_slices(0.0, &[-20.0, -12.0, -6.0, 0.0], 1e-3, 1e-2);
    let scale = slices.iter().flat_map(|s| s.w.iter()).fold(0.0f64, |m, x| m.max(x.abs()));
    assert!(scale > 1e-3);
    for sl in &slices {
        let (lo, hi) = sl.w.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(*x), b.max(*x)));
        assert!(hi - lo <= 1e-6 * scale, "spread {} at s = {}", hi - lo, sl.s);
    }
}

#[test]
fn slices_before_the_source_vanish() {
    for mass in [0.0, 0.5] {
        for sl in tortoise_slices(mass, &[-60.0, -40.0], 1e-3, 1e-2) {
            assert!(sl.w.iter().all(|w| *w == 0.0), "M = {mass}, s = {}", sl.s);
        }
    }
}

#[test]
fn energy_does_not_grow_after_the_source_switches_off() {
    let src = SourceSpec::default();
    let (_, t_off) = src.t_support();
    for mass in [0.0, 0.5] {
        let g = GridSpec { energy_every: 4, moving_window: false, ..grid(1.0 / 16.0, 60.0) };
        let sol = solve_forward(&reduce_radial(mass).unwrap(), &src, &g, &[]).unwrap();
        let after: Vec<f64> = sol.energy.iter().filter(|(t, _)| *t > t_off + 1.0).map(|e| e.1).collect();
        assert!(after.len() > 10 && after[0] > 0.0);
        if mass == 0.0 {
            for w in after.windows(2) {
                assert!(w[1] <= w[0] * (1.0 + 1e-12), "energy {} -> {}", w[0], w[1]);
            }
        } else {
            // The upwind inner boundary ignores the potential in its cell.
            let peak = after.iter().copied().fold(0.0, f64::max);
            assert!(peak <= after[0] * (1.0 + g.dr * g.dr), "energy {} rose to {peak}", after[0]);
        }
    }
}

#[test]
fn checkpoint_round_trip() {
    let g = GridSpec { frame_every: 64, ..grid(1.0 / 8.0, 20.0) };
    let sol = solve_forward(&reduce_radial(0.5).unwrap(), &SourceSpec::default(), &g, &[]).unwrap();
    let dir = std::env::temp_dir().join(format!("scri-checkpoint-{}", std::process::id()));
    let header = write_checkpoint(&sol, &dir, "ck", "seed = 1").unwrap();
    let (back, frames) = read_checkpoint(&dir, "ck").unwrap();
    std::fs::remove_dir_all(&dir).ok();
    assert_eq!(header, back);
    assert_eq!(frames, sol.frames);
    assert_eq!(header.run_id.len(), 12);
    assert_ne!(header.run_id, run_id("seed = 2", &[]));
}
