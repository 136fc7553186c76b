//! One pass/fail line per acceptance criterion. Run with
//! `cargo test --release --test acceptance`.

use std::process::ExitCode;
use std::time::Instant;

use scri::asympt::{detect_log_structure, verify_log_coefficient, ExpansionFit, FitOptions, LogConstants};
use scri::coords::CutoffSpec;
use scri::geometry::{make_kerr_exterior, make_minkowski, validate_model};
use scri::hamflow::{check_nontrapping, linearization};
use scri::run::{
    convergence_study, front_face_study, index_property_suite, mellin_oracle_loop, ConvergenceConfig,
    ExtractionConfig, MellinLoopConfig,
};
use scri::solver::{GridSpec, NullChart, SourceSpec};

const KERR_TOL: f64 = 1e-10;
const EIGEN_TOL: f64 = 1e-8;
const COVECTOR_TOL: f64 = 1e-8;
const MIN_ORDER: f64 = 1.9;
const FINEST_REL_ERROR: f64 = 1e-4;
const SHORT_RANGE_RATIO: f64 = 1e-3;
const LOG_MASS: f64 = 0.05;
const LOG_RESIDUAL: f64 = 0.15;
const LOG_THRESHOLD: f64 = 0.1;
const INDEX_SETS: usize = 200;
const MELLIN_CASES: usize = 20;
const MELLIN_TOL: f64 = 1e-6;
const LOG_FLOOR: f64 = 1e-6;
const NULL_SEEDS: usize = 64;
const HORIZON: f64 = 200.0;
const RADIAL_TOL: f64 = 1e-3;
const SEED: u64 = 20240917;

type Outcome = Result<(bool, String), scri::Error>;

fn extraction() -> ExtractionConfig {
    ExtractionConfig {
        chart: NullChart::Logified { t_origin: -5.0, cutoff: CutoffSpec::default() },
        s_min: -12.0,
        s_max: 12.0,
        ds: 0.25,
        rho_min: 3e-6,
        rho_max: 3e-4,
        per_octave: 4,
    }
}

fn fit_options() -> FitOptions {
    FitOptions { rho_min: 3e-6, rho_max: 3e-4, absorber: 3, ..FitOptions::default() }
}

fn grid(dr: f64) -> GridSpec {
    GridSpec { dr, courant: 1.0, t_end: 0.0, moving_window: true, ..GridSpec::default() }
}

fn kerr_constants() -> Outcome {
    let mut worst = 0.0f64;
    let mut invariants = true;
    for (mass, spin) in [(1.0, 0.0), (1.0, 0.5), (0.25, 0.1)] {
        let r = validate_model(&make_kerr_exterior(mass, spin)?)?;
        let c = &r.constants;
        for d in [c.m - 4.0 * mass, c.omega - 1.0, c.alpha - 2.0, c.beta - 4.0] {
            worst = worst.max(d.abs());
        }
        invariants &= r.passed();
    }
    Ok((worst <= KERR_TOL && invariants, format!("max deviation {worst:.2e} (tol {KERR_TOL:.0e})")))
}

fn eigenstructure() -> Outcome {
    let mut worst = 0.0f64;
    let mut shape = true;
    let mut notes = vec![];
    for (model, long_range) in [(make_minkowski(), false), (make_kerr_exterior(1.0, 0.0)?, true)] {
        let r = linearization(&model)?;
        shape &= r.clusters.len() == 3 && r.jordan_block == long_range;
        for v in [-8.0, -4.0, 0.0] {
            worst = match r.cluster_near(v) {
                Some(c) => worst.max((c.re - v).abs()).max(c.im.abs()),
                None => f64::INFINITY,
            };
        }
        if long_range {
            worst = worst.max((r.matrix[3][0] + 4.0 * model.m).abs());
            worst = worst.max(r.check("dxi_hat chain").unwrap_or(f64::INFINITY));
        }
        notes.push(format!("{} jordan={}", model.label, r.jordan_block));
    }
    Ok((shape && worst <= EIGEN_TOL, format!("error {worst:.2e} (tol {EIGEN_TOL:.0e}); {}", notes.join(", "))))
}

fn eigencovector() -> Outcome {
    let mut worst = 0.0f64;
    for model in [make_minkowski(), make_kerr_exterior(1.0, 0.0)?] {
        worst = worst.max(linearization(&model)?.check("dv + dxi_hat - m drho").unwrap_or(f64::INFINITY));
    }
    Ok((worst <= COVECTOR_TOL, format!("residual {worst:.2e} (tol {COVECTOR_TOL:.0e})")))
}

fn solver_convergence() -> Outcome {
    let cfg = ConvergenceConfig {
        drs: vec![1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0],
        t_eval: 30.0,
        r_step: 0.25,
        r_max: 45.0,
        min_order: MIN_ORDER,
        max_rel_error: FINEST_REL_ERROR,
    };
    let st = convergence_study(&SourceSpec::default(), &cfg)?;
    let orders: Vec<String> = st.rows.iter().filter_map(|r| r.order).map(|o| format!("{o:.3}")).collect();
    Ok((
        st.min_order >= MIN_ORDER && st.finest_rel_error <= FINEST_REL_ERROR,
        format!("orders [{}], finest relative error {:.2e}", orders.join(", "), st.finest_rel_error),
    ))
}

fn short_range_logs() -> Outcome {
    let st = front_face_study(0.0, &SourceSpec::default(), &grid(1.0 / 16.0), &extraction(), &fit_options(), 0)?;
    let w10 = ExpansionFit::max_abs(&st.fit.w1_0);
    let (a, b) = (ExpansionFit::max_abs(&st.fit.w1_1), ExpansionFit::max_abs(&st.fit.w1_2));
    let ratio = a.max(b) / w10;
    Ok((ratio <= SHORT_RANGE_RATIO, format!("max(|w1_1|, |w1_2|) / max|w1_0| = {ratio:.2e} (tol {SHORT_RANGE_RATIO:.0e})")))
}

fn long_range_log() -> Outcome {
    let k = LogConstants::kerr(LOG_MASS);
    let mut reps = vec![];
    for dr in [1.0 / 16.0, 1.0 / 32.0] {
        let st = front_face_study(LOG_MASS, &SourceSpec::default(), &grid(dr), &extraction(), &fit_options(), 0)?;
        reps.push(verify_log_coefficient(&st.fit, &k, LOG_THRESHOLD)?);
    }
    let (c, f) = (&reps[0], &reps[1]);
    Ok((
        f.max_rel_residual <= LOG_RESIDUAL && f.max_rel_residual < c.max_rel_residual,
        format!(
            "residual {:.3} -> {:.3} (tol {LOG_RESIDUAL}); opposite sign {:.3} -> {:.3}",
            c.max_rel_residual, f.max_rel_residual, c.max_flipped_rel_residual, f.max_flipped_rel_residual
        ),
    ))
}

fn index_algebra() -> Outcome {
    let r = index_property_suite(INDEX_SETS, SEED)?;
    Ok((
        r.passed(),
        format!(
            "{} sets, {} commutativity / {} associativity failures, logify(smooth) exact: {}, resonance example exact: {}",
            r.sets, r.commutativity_failures, r.associativity_failures, r.logify_smooth_exact, r.resonance_example_exact
        ),
    ))
}

fn mellin_loop() -> Outcome {
    let r = mellin_oracle_loop(&MellinLoopConfig { cases: MELLIN_CASES, location_tol: MELLIN_TOL }, SEED)?;
    Ok((
        r.failures == 0 && r.cases.len() == MELLIN_CASES,
        format!("{} failures of {}, worst location error {:.2e} (tol {MELLIN_TOL:.0e})", r.failures, r.cases.len(), r.worst_location_error),
    ))
}

fn logification() -> Outcome {
    let r = detect_log_structure(2, 0.8, &CutoffSpec::default(), &[-0.1, 0.0, 0.12], 1e-4, 0.05, 80, LOG_FLOOR)?;
    Ok((
        r.matches() && r.max_extra <= LOG_FLOOR,
        format!("detected {:?}, predicted {:?}, largest extra {:.1e}", r.detected, r.predicted, r.max_extra),
    ))
}

fn nontrapping() -> Outcome {
    let r = check_nontrapping(&make_minkowski(), NULL_SEEDS, HORIZON, RADIAL_TOL);
    Ok((r.reached == NULL_SEEDS, format!("{} of {} seeds reached the radial set", r.reached, r.outcomes.len())))
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, fn() -> Outcome); 10] = [
        (1, "Kerr normal-form constants", kerr_constants),
        (2, "radial-set eigenstructure", eigenstructure),
        (3, "eigencovector dv + dxi_hat - m drho", eigencovector),
        (4, "solver convergence", solver_convergence),
        (5, "short-range log absence", short_range_logs),
        (6, "long-range log coefficient", long_range_log),
        (7, "index-set algebra", index_algebra),
        (8, "Mellin oracle loop", mellin_loop),
        (9, "logification structure", logification),
        (10, "non-trapping sampling", nontrapping),
    ];
    let mut failed = 0;
    for (id, name, f) in criteria {
        let t0 = Instant::now();
        let (ok, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
        failed += usize::from(!ok);
        println!("{} {id:>2} {name}: {detail} [{:.2} s]", if ok { "PASS" } else { "FAIL" }, t0.elapsed().as_secs_f64());
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
