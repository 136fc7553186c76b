use std::fmt::Write as _;
use std::path::PathBuf;

use serde::Serialize;

use super::config::RunConfig;
use super::studies::{convergence_study, front_face_study, parse_e0, solve_slices, tail_study, FrontFaceStudy};
use super::verify::{run_criteria, Criterion};
use super::RunDir;
use crate::asympt::{verify_log_coefficient, ExpansionFit, LogCoefficientReport, LogConstants};
use crate::geometry::{validate_model, ModelSpec, ValidationReport};
use crate::hamflow::{check_nontrapping, linearization, trace_bicharacteristic};
use crate::indexsets::{resonance_sets, IndexSet};
use crate::solver::{slices_to_csv, write_checkpoint, GridSpec};
use crate::Result;

/// Result of one command: pass/fail, where the files went and a short
/// human-readable summary.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub passed: bool,
    pub dir: PathBuf,
    pub summary: Vec<String>,
}

fn file_label(label: &str) -> String {
    let s: String = label.chars().map(|c| if c.is_ascii_alphanumeric() || c == '.' { c } else { '_' }).collect();
    s.trim_matches('_').to_string()
}

#[derive(Serialize)]
struct GeometryEntry {
    spec: ModelSpec,
    error: Option<String>,
    report: Option<ValidationReport>,
    /// Largest deviation from `m = 4M`, `(omega, alpha, beta) = (1, 2, 4)`.
    kerr_deviation: Option<f64>,
    passed: bool,
}

pub fn cmd_geometry_check(cfg: &RunConfig) -> Result<Outcome> {
    let dir = RunDir::create(cfg, "geometry-check")?;
    let mut entries = Vec::new();
    let mut summary = Vec::new();
    for spec in &cfg.geometry.models {
        let mut e = GeometryEntry { spec: spec.clone(), error: None, report: None, kerr_deviation: None, passed: false };
        match spec.build().and_then(|m| validate_model(&m)) {
            Ok(r) => {
                let c = &r.constants;
                if let ModelSpec::Kerr { mass, .. } = spec {
                    let dev = [c.m - 4.0 * mass, c.omega - 1.0, c.alpha - 2.0, c.beta - 4.0]
                        .iter()
                        .fold(0.0f64, |a, x| a.max(x.abs()));
                    e.kerr_deviation = Some(dev);
                }
                e.passed = r.passed() && e.kerr_deviation.is_none_or(|d| d <= cfg.geometry.kerr_tol);
                summary.push(format!(
                    "{}: m = {:.12}, (omega, alpha, beta) = ({:.12}, {:.12}, {:.12}) {}",
                    r.label,
                    c.m,
                    c.omega,
                    c.alpha,
                    c.beta,
                    if e.passed { "ok" } else { "FAILED" }
                ));
                for ch in r.checks.iter().filter(|c| !c.passed) {
                    summary.push(format!("  failed check '{}': {:.3e} ({})", ch.name, ch.margin, ch.detail));
                }
                e.report = Some(r);
            }
            Err(err) => {
                summary.push(format!("{spec:?}: {err}"));
                e.error = Some(err.to_string());
            }
        }
        entries.push(e);
    }
    dir.write_json("geometry_report.json", &entries)?;
    let passed = entries.iter().all(|e| e.passed);
    Ok(Outcome { passed, dir: dir.path, summary })
}

pub fn cmd_flow(cfg: &RunConfig) -> Result<Outcome> {
    let dir = RunDir::create(cfg, "flow")?;
    let f = &cfg.flow;
    let mut passed = true;
    let mut summary = Vec::new();
    for spec in &f.models {
        let model = spec.build()?;
        let tag = file_label(&model.label);
        match linearization(&model) {
            Ok(lin) => {
                let eig: Vec<String> = lin
                    .clusters
                    .iter()
                    .map(|c| format!("{:.10} (x{}, geometric {})", c.re, c.algebraic, c.geometric))
                    .collect();
                summary.push(format!("{}: eigenvalues {}; Jordan block {}", model.label, eig.join(", "), lin.jordan_block));
                dir.write_json(&format!("linearization_{tag}.json"), &lin)?;
            }
            Err(e) => {
                passed = false;
                summary.push(format!("{}: linearization failed: {e}", model.label));
            }
        }
        let nt = check_nontrapping(&model, f.seeds, f.horizon, f.tol);
        summary.push(format!(
            "{}: {} seeds, {} reached the radial set, {} left the chart, {} unclassified",
            model.label,
            nt.outcomes.len(),
            nt.reached,
            nt.left_chart,
            nt.unclassified
        ));
        passed &= nt.passed();
        for o in nt.outcomes.iter().take(f.trajectories) {
            if let Some(p0) = &o.seed {
                if let Ok(b) = trace_bicharacteristic(&model, p0, f.horizon, f.tol) {
                    dir.write(&format!("trajectory_{tag}_{}.csv", o.index), &b.to_csv(model.k()))?;
                }
            }
        }
        dir.write_json(&format!("nontrapping_{tag}.json"), &nt)?;
    }
    Ok(Outcome { passed, dir: dir.path, summary })
}

pub fn cmd_solve(cfg: &RunConfig) -> Result<Outcome> {
    let dir = RunDir::create(cfg, "solve")?;
    let s = &cfg.solve;
    let text = cfg.to_toml()?;
    let (sol, slices) = solve_slices(s.mass, &s.source, &s.grid, &cfg.extraction, s.checkpoint_frames)?;
    let header = write_checkpoint(&sol, &dir.path, "checkpoint", &text)?;
    let head = vec![
        format!("model {}", sol.model.label()),
        format!("chart {}", cfg.extraction.chart.label()),
        format!("dr {}", sol.dr),
    ];
    dir.write("slices.csv", &slices_to_csv(&slices, &head))?;
    let mut summary = vec![
        format!("{}: {} levels, {} snapshots, run id {}", sol.model.label(), sol.levels, header.frames.len(), header.run_id),
        format!("{} slices written, max |psi| {:.3e}", slices.len(), sol.max_abs_psi()),
    ];
    let mut passed = true;
    if sol.model.is_minkowski() {
        let c = &s.convergence;
        let study = convergence_study(&s.source, c)?;
        dir.write("convergence.csv", &study.to_csv())?;
        for r in &study.rows {
            let o = r.order.map_or(String::new(), |o| format!(", order {o:.3}"));
            summary.push(format!("dr {:.6}: relative error {:.3e}{o}", r.dr, r.rel_error));
        }
        passed = study.min_order >= c.min_order && study.finest_rel_error <= c.max_rel_error;
    }
    Ok(Outcome { passed, dir: dir.path, summary })
}

fn short_range_ratio(fit: &ExpansionFit) -> f64 {
    let w10 = ExpansionFit::max_abs(&fit.w1_0);
    let logs = ExpansionFit::max_abs(&fit.w1_1).max(ExpansionFit::max_abs(&fit.w1_2));
    if w10 > 0.0 {
        logs / w10
    } else if logs == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

fn fit_outputs(dir: &RunDir, st: &FrontFaceStudy, report: &LogCoefficientReport, suffix: &str) -> Result<()> {
    dir.write(&format!("fit{suffix}.csv"), &report.to_csv(&st.fit))?;
    dir.write_json(&format!("verify{suffix}.json"), report)?;
    Ok(())
}

pub fn cmd_fit(cfg: &RunConfig) -> Result<Outcome> {
    let dir = RunDir::create(cfg, "fit")?;
    let s = &cfg.solve;
    let f = &cfg.fit;
    let consts = LogConstants::kerr(s.mass);
    let mut grids = vec![s.grid.clone()];
    if f.refine {
        grids.push(GridSpec { dr: 0.5 * s.grid.dr, ..s.grid.clone() });
    }
    let mut summary = Vec::new();
    let mut reports = Vec::new();
    for (i, g) in grids.iter().enumerate() {
        let st = front_face_study(s.mass, &s.source, g, &cfg.extraction, &f.options, 0)?;
        let rep = verify_log_coefficient(&st.fit, &consts, f.threshold)?;
        fit_outputs(&dir, &st, &rep, if i == 0 { "" } else { "_refined" })?;
        if s.mass == 0.0 {
            summary.push(format!(
                "dr {}: max(|w1_1|, |w1_2|) / max |w1_0| = {:.3e}",
                g.dr,
                short_range_ratio(&st.fit)
            ));
        } else {
            summary.push(format!(
                "dr {}: log coefficient relative residual {:.4} (opposite sign {:.4}), {} of {} slices converged",
                g.dr,
                rep.max_rel_residual,
                rep.max_flipped_rel_residual,
                st.fit.converged.iter().filter(|c| **c).count(),
                st.fit.s.len()
            ));
        }
        reports.push((st, rep));
    }
    let passed = if s.mass == 0.0 {
        reports.iter().all(|(st, _)| short_range_ratio(&st.fit) <= 1e-3)
    } else {
        let last = &reports[reports.len() - 1].1;
        let decreasing = reports.len() < 2 || last.max_rel_residual < reports[0].1.max_rel_residual;
        last.max_rel_residual <= f.tolerance && decreasing
    };

    let tail = tail_study(&s.source, &cfg.tail)?;
    let mut csv = String::from("s,w0\n");
    for (x, w) in tail.s.iter().zip(&tail.w0) {
        let _ = writeln!(csv, "{x:.10e},{w:.17e}");
    }
    dir.write("tail.csv", &csv)?;
    dir.write_json("tail.json", &tail)?;
    match &tail.fit {
        Some(t) => summary.push(format!(
            "tail (M = {}): w0 ~ s^({:.4}{:+.4}i) (log s)^{}, residual {:.2e}, drift {:.3e} ({}); Minkowski max |w0| {:.1e}",
            tail.mass,
            t.p.re,
            t.p.im,
            t.kappa,
            t.rel_residual,
            t.drift,
            if t.stable { "stable" } else { "unstable" },
            tail.minkowski_max_abs_w0
        )),
        None => summary.push(format!("tail (M = {}): none above {:.1e}", tail.mass, tail.floor)),
    }
    Ok(Outcome { passed, dir: dir.path, summary })
}

fn set_rows(out: &mut String, name: &str, set: &IndexSet) {
    for e in set.entries() {
        let _ = writeln!(out, "{name},{},{}", e.z, e.k);
    }
}

pub fn cmd_indexset(cfg: &RunConfig) -> Result<Outcome> {
    let c = &cfg.indexset;
    let e0 = parse_e0(&c.e0)?;
    let dir = RunDir::create(cfg, "indexset")?;
    let sets = resonance_sets(&e0, c.m_nonzero, c.depth);
    let mut csv = String::from("set,re,im,k\n");
    set_rows(&mut csv, "E_res0", &sets.e_res0);
    set_rows(&mut csv, "E_res", &sets.e_res);
    set_rows(&mut csv, "E_scri", &sets.e_scri);
    dir.write("e_tot.csv", &csv)?;
    let (res, scri) = sets.e_tot();
    let show = |s: &IndexSet| s.entries().iter().map(|e| format!("({},{})", e.z, e.k)).collect::<Vec<_>>().join(" ");
    let summary = vec![format!("E_res  = {}", show(res)), format!("E_scri = {}", show(scri))];
    Ok(Outcome { passed: true, dir: dir.path, summary })
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<Outcome> {
    let dir = RunDir::create(cfg, "verify")?;
    let criteria: Vec<Criterion> = run_criteria(cfg);
    let summary: Vec<String> = criteria.iter().map(|c| c.line()).collect();
    dir.write_json("criteria.json", &criteria)?;
    dir.write("criteria.txt", &(summary.join("\n") + "\n"))?;
    let passed = criteria.iter().all(|c| c.passed);
    Ok(Outcome { passed, dir: dir.path, summary })
}
