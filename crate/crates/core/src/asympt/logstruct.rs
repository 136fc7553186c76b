use nalgebra::DMatrix;
use serde::Serialize;

use crate::coords::{unlogify_point, CutoffSpec};
use crate::indexsets::{Exponent, IndexEntry, IndexSet};
use crate::numerics::lstsq::weighted_lstsq;
use crate::{Error, Result};

/// Coefficients `(n, l, c)` of `rho_bar^n log^l rho_bar` fitted at one
/// `v_bar`.
#[derive(Clone, Debug, Serialize)]
pub struct LogStructureFit {
    pub v_bar: f64,
    pub coefficients: Vec<(u32, u32, f64)>,
    pub cond: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LogStructureReport {
    pub order: u32,
    pub m: f64,
    pub fits: Vec<LogStructureFit>,
    /// `(n, l)` with `|c| > floor max |c|` at some `v_bar`.
    pub detected: Vec<(u32, u32)>,
    /// `(n, l)` predicted by the logified smooth index set (the smooth set
    /// itself when `m = 0`), `n <= order`.
    pub predicted: Vec<(u32, u32)>,
    /// Largest `|c| / max |c|` among entries outside the prediction.
    pub max_extra: f64,
    /// Smallest `|c| / max |c|` among predicted entries (over `v_bar`,
    /// maximised per entry).
    pub min_predicted: f64,
    pub floor: f64,
}

impl LogStructureReport {
    pub fn matches(&self) -> bool {
        self.detected == self.predicted
    }
}

/// Smooth synthetic `u(rho, v) = sum_{j <= order} rho^j a_j(v)`, with `a_j` a
/// polynomial of degree `order - j` whose coefficients are all nonzero.
pub fn smooth_synthetic(order: u32, rho: f64, v: f64) -> f64 {
    let mut total = 0.0;
    for j in 0..=order {
        let mut a = 0.0;
        let mut p = 1.0;
        for i in 0..=(order - j) {
            a += (1.0 + 0.37 * i as f64 + 0.21 * j as f64) / (1 + i) as f64 * p;
            p *= v;
        }
        total += rho.powi(j as i32) * a;
    }
    total
}

/// Push `smooth_synthetic` through the logification `v_bar = v + chi(v) m rho
/// log rho`, sample it at fixed `v_bar` on `[rho_min, rho_max]` and fit the
/// basis `rho^n log^l rho`, `n <= order`, `l <= n + 1`: every predicted
/// entry plus the next log power at each order.
pub fn detect_log_structure(
    order: u32,
    m: f64,
    chi: &CutoffSpec,
    v_bars: &[f64],
    rho_min: f64,
    rho_max: f64,
    samples: usize,
    floor: f64,
) -> Result<LogStructureReport> {
    let mut cols = Vec::new();
    for n in 0..=order {
        for l in 0..=n + 1 {
            cols.push((n, l));
        }
    }
    if samples < cols.len() + 2 {
        return Err(Error::InsufficientData(format!("{samples} samples for {} columns", cols.len())));
    }
    let rhos: Vec<f64> = (0..samples)
        .map(|i| rho_min * (rho_max / rho_min).powf(i as f64 / (samples - 1) as f64))
        .collect();
    let mut fits = Vec::new();
    for &vb in v_bars {
        let mut b = Vec::with_capacity(samples);
        for &r in &rhos {
            let (_, v) = unlogify_point(r, vb, m, chi)?;
            if chi.value(v) != 1.0 {
                return Err(Error::Precondition(format!("v = {v} leaves the cutoff plateau at rho = {r}")));
            }
            b.push(smooth_synthetic(order, r, v));
        }
        let a = DMatrix::from_fn(samples, cols.len(), |i, j| {
            let (n, l) = cols[j];
            rhos[i].powi(n as i32) * rhos[i].ln().powi(l as i32)
        });
        let sol = weighted_lstsq(&a, &b, None)?;
        fits.push(LogStructureFit {
            v_bar: vb,
            coefficients: cols.iter().zip(&sol.coef).map(|(&(n, l), &c)| (n, l, c)).collect(),
            cond: sol.cond,
        });
    }
    let depth = order as f64 + 0.5;
    let smooth = IndexSet::smooth(depth);
    let predicted_set = if m == 0.0 { smooth } else { smooth.logify() };
    let mut predicted: Vec<(u32, u32)> = cols
        .iter()
        .copied()
        .filter(|&(n, l)| predicted_set.contains(&Exponent::neg_imag(n as i64), l))
        .collect();
    predicted.sort();
    let mut detected = Vec::new();
    let mut max_extra = 0.0f64;
    let mut min_predicted = f64::INFINITY;
    for (idx, &(n, l)) in cols.iter().enumerate() {
        let mut rel = 0.0f64;
        for f in &fits {
            let cmax = f.coefficients.iter().fold(0.0f64, |mx, c| mx.max(c.2.abs()));
            rel = rel.max(f.coefficients[idx].2.abs() / cmax);
        }
        if rel > floor {
            detected.push((n, l));
        }
        if predicted.contains(&(n, l)) {
            min_predicted = min_predicted.min(rel);
        } else {
            max_extra = max_extra.max(rel);
        }
    }
    detected.sort();
    Ok(LogStructureReport { order, m, fits, detected, predicted, max_extra, min_predicted, floor })
}

/// Entries of the logified smooth set with `Im z >= -order`, for display.
pub fn predicted_entries(order: u32) -> Vec<IndexEntry> {
    IndexSet::smooth(order as f64 + 0.5).logify().entries()
}
