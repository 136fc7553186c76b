use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use super::evolve::{GridSpec, ProbePoint, SolutionGrid};
use super::radial::RadialModel;
use super::source::SourceSpec;
use crate::coords::{unlogify_point, CutoffSpec};
use crate::{Error, Result};

/// Coordinates in which fixed-`s` curves and the defining function are taken.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NullChart {
    /// `s = 2(t - r*)`, `rho = 1/r`, `w = r u`.
    Tortoise,
    /// `rho = 1/(t - t_origin)`, `v = 1 - r^2 rho^2`, logified with
    /// `m = 4M` and cutoff `chi`; `s = v_bar / rho`, `w = u / rho`.
    Logified { t_origin: f64, cutoff: CutoffSpec },
}

impl NullChart {
    pub fn label(&self) -> String {
        match self {
            NullChart::Tortoise => "tortoise: s = 2(t - r*), rho = 1/r, w = r u".into(),
            NullChart::Logified { t_origin, cutoff } => format!(
                "logified: rho = 1/(t - {t_origin}), v = 1 - r^2 rho^2, v_bar = v + chi(v) m rho log rho \
                 (chi plateau {}, support {}), s = v_bar/rho, w = u/rho",
                cutoff.c1, cutoff.c_outer
            ),
        }
    }
}

/// Geometric schedule `rho_k = rho_max 2^{-k / per_octave}`, `k = 0 .. count`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhoSchedule {
    pub rho_max: f64,
    pub per_octave: usize,
    pub count: usize,
}

impl RhoSchedule {
    /// Schedule covering `[rho_min, rho_max]`.
    pub fn spanning(rho_min: f64, rho_max: f64, per_octave: usize) -> Self {
        let octaves = (rho_max / rho_min).log2();
        RhoSchedule { rho_max, per_octave, count: (octaves * per_octave as f64).round() as usize + 1 }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|k| self.rho_max * (-(k as f64) / self.per_octave as f64).exp2()).collect()
    }
}

/// Samples of `w` along one fixed-`s` curve, `rho` strictly decreasing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NullSlice {
    pub s: f64,
    pub rho: Vec<f64>,
    pub w: Vec<f64>,
}

impl NullSlice {
    pub fn octaves(&self) -> f64 {
        match (self.rho.first(), self.rho.last()) {
            (Some(a), Some(b)) if *b > 0.0 => (a / b).log2(),
            _ => 0.0,
        }
    }
}

/// Where each slice sample has to be read from the evolution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlicePlan {
    pub chart: NullChart,
    pub model: RadialModel,
    pub s: Vec<f64>,
    /// Per slice, the `rho` values actually used (snapped to time levels in
    /// the logified chart).
    pub rho: Vec<Vec<f64>>,
    /// Per slice and sample: the evolution point and the factor turning
    /// `psi` into `w`.
    pub points: Vec<Vec<(ProbePoint, f64)>>,
}

impl SlicePlan {
    /// All probe points, slice by slice.
    pub fn probes(&self) -> Vec<ProbePoint> {
        self.points.iter().flatten().map(|(p, _)| *p).collect()
    }

    pub fn t_max(&self) -> f64 {
        self.points.iter().flatten().map(|(p, _)| p.t).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Plan the evolution points for slices at the given `s` values.
pub fn plan_null_slices(
    model: &RadialModel,
    source: &SourceSpec,
    grid: &GridSpec,
    chart: NullChart,
    s_values: &[f64],
    schedule: &RhoSchedule,
) -> Result<SlicePlan> {
    grid.validate()?;
    if schedule.per_octave == 0 || !(schedule.rho_max > 0.0) {
        return Err(Error::Precondition("rho schedule needs rho_max > 0 and per_octave >= 1".into()));
    }
    let rho_nominal = schedule.values();
    let (t_start, _) = source.t_support();
    let dt = grid.dt();
    let mut rho_out = Vec::with_capacity(s_values.len());
    let mut points = Vec::with_capacity(s_values.len());
    match chart {
        NullChart::Tortoise => {
            for &s in s_values {
                let mut pts = Vec::with_capacity(rho_nominal.len());
                for &rho in &rho_nominal {
                    let r = 1.0 / rho;
                    let rs = model.tortoise(r)?;
                    pts.push((ProbePoint { t: 0.5 * s + rs, r_star: rs }, 1.0));
                }
                rho_out.push(rho_nominal.clone());
                points.push(pts);
            }
        }
        NullChart::Logified { t_origin, cutoff } => {
            // Snap each t = t_origin + 1/rho to a time level so that only
            // spatial interpolation is needed.
            let mut rho_snap: Vec<f64> = Vec::with_capacity(rho_nominal.len());
            for &rho in &rho_nominal {
                let n = ((t_origin + 1.0 / rho - t_start) / dt).round();
                let t = t_start + n * dt;
                let r = 1.0 / (t - t_origin);
                if !(r > 0.0) {
                    return Err(Error::Precondition(format!("rho = {rho} maps to t <= t_origin")));
                }
                if rho_snap.last().is_some_and(|&prev| r >= prev) {
                    return Err(Error::Precondition(format!(
                        "rho schedule too dense for dt = {dt} near rho = {rho}"
                    )));
                }
                rho_snap.push(r);
            }
            let m = model.m();
            for &s in s_values {
                let mut pts = Vec::with_capacity(rho_snap.len());
                for &rho in &rho_snap {
                    let tp = 1.0 / rho;
                    let (_, v) = unlogify_point(rho, s * rho, m, &cutoff)?;
                    if !(v < 1.0) {
                        return Err(Error::OutsideChart(format!("v = {v} at s = {s}, rho = {rho}")));
                    }
                    let r = tp * (1.0 - v).sqrt();
                    let rs = model.tortoise(r)?;
                    // w = u / rho = psi t' / r.
                    pts.push((ProbePoint { t: t_origin + tp, r_star: rs }, tp / r));
                }
                rho_out.push(rho_snap.clone());
                points.push(pts);
            }
        }
    }
    Ok(SlicePlan { chart, model: *model, s: s_values.to_vec(), rho: rho_out, points })
}

/// Read the planned slices from a solution computed with `plan.probes()`.
pub fn extract_null_slices(sol: &SolutionGrid, plan: &SlicePlan) -> Result<Vec<NullSlice>> {
    let probes = plan.probes();
    if sol.probes != probes {
        return Err(Error::Precondition("solution was not computed with this slice plan's probes".into()));
    }
    if sol.model != plan.model {
        return Err(Error::Precondition("slice plan and solution use different models".into()));
    }
    let mut k = 0;
    let mut out = Vec::with_capacity(plan.s.len());
    for (i, &s) in plan.s.iter().enumerate() {
        let mut w = Vec::with_capacity(plan.points[i].len());
        for (_, factor) in &plan.points[i] {
            w.push(sol.probe_psi[k] * factor);
            k += 1;
        }
        out.push(NullSlice { s, rho: plan.rho[i].clone(), w });
    }
    Ok(out)
}

/// Slices read directly off stored frames: every sample time must coincide
/// with a frame.
pub fn extract_from_frames(sol: &SolutionGrid, plan: &SlicePlan) -> Result<Vec<NullSlice>> {
    plan.s
        .par_iter()
        .enumerate()
        .map(|(i, &s)| {
            let w = plan.points[i]
                .iter()
                .map(|(p, factor)| {
                    let frame = sol
                        .frame_near(p.t)
                        .filter(|f| (f.t - p.t).abs() <= 1e-9 * p.t.abs().max(1.0))
                        .ok_or_else(|| Error::OutsideChart(format!("no frame at t = {}", p.t)))?;
                    Ok(sol.psi_in_frame(frame, p.r_star)? * factor)
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(NullSlice { s, rho: plan.rho[i].clone(), w })
        })
        .collect()
}

/// CSV with columns `s,rho,w`, preceded by `#` header lines.
pub fn slices_to_csv(slices: &[NullSlice], header: &[String]) -> String {
    let mut out = String::new();
    for h in header {
        let _ = writeln!(out, "# {h}");
    }
    out.push_str("s,rho,w\n");
    for sl in slices {
        for (r, w) in sl.rho.iter().zip(&sl.w) {
            let _ = writeln!(out, "{:.17e},{:.17e},{:.17e}", sl.s, r, w);
        }
    }
    out
}
