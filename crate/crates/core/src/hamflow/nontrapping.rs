use rayon::prelude::*;
use serde::Serialize;

use super::{trace_bicharacteristic, CotangentPoint, Termination};
use crate::geometry::{BasePoint, MetricModel};
use crate::numerics::halton::halton;

/// Outcome of tracing one seed.
#[derive(Clone, Debug, Serialize)]
pub struct SeedOutcome {
    pub index: u64,
    pub seed: Option<CotangentPoint>,
    pub termination: Option<Termination>,
    pub final_distance: Option<f64>,
    pub max_abs_lambda: Option<f64>,
    pub steps: usize,
    pub error: Option<String>,
}

impl SeedOutcome {
    pub fn classified(&self) -> bool {
        matches!(self.termination, Some(Termination::ReachedRadialSet | Termination::LeftChart))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NonTrappingReport {
    pub label: String,
    pub horizon: f64,
    pub tol: f64,
    pub reached: usize,
    pub left_chart: usize,
    pub unclassified: usize,
    pub outcomes: Vec<SeedOutcome>,
}

impl NonTrappingReport {
    pub fn passed(&self) -> bool {
        self.unclassified == 0 && !self.outcomes.is_empty()
    }

    pub fn reached_fraction(&self) -> f64 {
        self.reached as f64 / self.outcomes.len().max(1) as f64
    }
}

/// Deterministic null seed number `index`.
///
/// Base point from a Halton sequence: `rho` in `[0.02, 0.1]` times the chart
/// radius, `|v| <= 0.3`, polar angles in `[1, pi - 1]`, azimuth in
/// `[0, 2 pi)`. Fiber: `gamma = 1`, `eta` with `h`-norm at most one, and `xi`
/// the smaller root of `lambda = 0`. Returns `None` if there is no real root.
pub fn null_seed(model: &MetricModel, index: u64) -> Option<CotangentPoint> {
    let k = model.k();
    let u = halton(index + 1, 2 + 2 * k);
    let r_scale = model.chart.rho_max.min(1.0);
    let rho = (0.02 + 0.08 * u[0]) * r_scale;
    let v = (-0.3 + 0.6 * u[1]).clamp(-model.chart.v_max, model.chart.v_max);
    let y: Vec<f64> = (0..k)
        .map(|i| {
            let t = u[2 + i];
            if !model.chart.spherical_angles {
                -0.5 + t
            } else if i + 1 < k {
                1.0 + (std::f64::consts::PI - 2.0) * t
            } else {
                std::f64::consts::TAU * t
            }
        })
        .collect();
    let base = BasePoint::new(rho, v, y.clone());
    if !model.in_chart(&base) {
        return None;
    }
    let mut eta: Vec<f64> = (0..k).map(|i| -1.0 + 2.0 * u[2 + k + i]).collect();
    let jet = model.dual_jet(&base);
    let mut h_norm = 0.0;
    for i in 0..k {
        for j in 0..k {
            h_norm -= jet.yy[i * k + j].val * eta[i] * eta[j];
        }
    }
    if h_norm > 1.0 {
        let s = h_norm.sqrt();
        eta.iter_mut().for_each(|e| *e /= s);
    }

    let lam = |xi: f64| {
        let mut f = vec![xi, 1.0];
        f.extend_from_slice(&eta);
        model.symbol_derivatives(&base, &f).lambda
    };
    let (l0, lp, lm) = (lam(0.0), lam(1.0), lam(-1.0));
    let a = 0.5 * (lp + lm) - l0;
    let b = 0.5 * (lp - lm);
    let disc = b * b - 4.0 * a * l0;
    if a.abs() < 1e-14 || disc < 0.0 {
        return None;
    }
    let xi = (-b - disc.sqrt()) / (2.0 * a);
    Some(CotangentPoint { rho, v, y, xi, gamma: 1.0, eta })
}

/// Trace `seeds` deterministic null seeds forward (in parallel) and classify
/// each by termination.
pub fn check_nontrapping(model: &MetricModel, seeds: usize, horizon: f64, tol: f64) -> NonTrappingReport {
    let outcomes: Vec<SeedOutcome> = (0..seeds as u64)
        .into_par_iter()
        .map(|index| {
            let mut out = SeedOutcome {
                index,
                seed: None,
                termination: None,
                final_distance: None,
                max_abs_lambda: None,
                steps: 0,
                error: None,
            };
            let Some(p0) = null_seed(model, index) else {
                out.error = Some("no null covector at seed".into());
                return out;
            };
            out.seed = Some(p0.clone());
            match trace_bicharacteristic(model, &p0, horizon, tol) {
                Ok(b) => {
                    out.final_distance = b.final_radial_distance();
                    out.max_abs_lambda = Some(b.max_abs_lambda());
                    out.steps = b.params.len() - 1;
                    if horizon > 0.0 && b.termination != Termination::HorizonExhausted {
                        out.termination = Some(b.termination);
                    }
                }
                Err(e) => out.error = Some(e.to_string()),
            }
            out
        })
        .collect();
    let count = |t: Termination| outcomes.iter().filter(|o| o.termination == Some(t)).count();
    let reached = count(Termination::ReachedRadialSet);
    let left_chart = count(Termination::LeftChart);
    NonTrappingReport {
        label: model.label.clone(),
        horizon,
        tol,
        reached,
        left_chart,
        unclassified: outcomes.len() - reached - left_chart,
        outcomes,
    }
}
