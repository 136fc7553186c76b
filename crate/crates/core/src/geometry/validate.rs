use nalgebra::DMatrix;
use serde::Serialize;

use super::{dual_metric_matrix, BasePoint, MetricModel};
use crate::jet::Jet;
use crate::Result;

/// Boundary data read off the dual metric at `rho = v = 0`.
#[derive(Clone, Debug, Serialize)]
pub struct BoundaryConstants {
    pub omega: f64,
    pub alpha: f64,
    pub beta: f64,
    pub m: f64,
    pub mu: Vec<f64>,
    pub upsilon: Vec<f64>,
}

impl BoundaryConstants {
    /// `omega - 2 alpha + beta`, the combination entering the log term.
    pub fn log_combination(&self) -> f64 {
        self.omega - 2.0 * self.alpha + self.beta
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct InvariantCheck {
    pub name: String,
    pub passed: bool,
    /// Worst value of the checked quantity over the sample set.
    pub margin: f64,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub label: String,
    pub constants: BoundaryConstants,
    pub checks: Vec<InvariantCheck>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

const NORMALIZATION_TOL: f64 = 1e-10;
const REMAINDER_BOUND: f64 = 1e4;
const REMAINDER_FLOOR: f64 = 1e-13;

/// Reference sphere point: the equator for spherical charts, the origin otherwise.
pub fn sphere_center(model: &MetricModel) -> Vec<f64> {
    let k = model.k();
    if model.chart.spherical_angles {
        (0..k).map(|i| if i + 1 < k { std::f64::consts::FRAC_PI_2 } else { 0.0 }).collect()
    } else {
        vec![0.0; k]
    }
}

fn sphere_samples(model: &MetricModel) -> Vec<Vec<f64>> {
    let k = model.k();
    if model.chart.spherical_angles {
        let cap = model.chart.polar_cap;
        let thetas = [std::f64::consts::FRAC_PI_2, 1.0_f64.max(cap + 0.05), std::f64::consts::PI - 1.0_f64.max(cap + 0.05)];
        let mut out = Vec::new();
        for &th in &thetas {
            for &ph in &[0.0, 1.3, 4.0] {
                out.push((0..k).map(|i| if i + 1 < k { th } else { ph }).collect());
            }
        }
        out
    } else {
        vec![vec![0.0; k], vec![0.7; k], (0..k).map(|i| if i % 2 == 0 { 0.3 } else { -0.4 }).collect()]
    }
}

/// Read off the boundary constants at the sphere point `y`.
pub fn measure_constants(model: &MetricModel, y: &[f64]) -> BoundaryConstants {
    let k = model.k();
    let at = |rho: f64, v: f64| model.dual_jet(&BasePoint::new(rho, v, y.to_vec()));
    let corner = at(0.0, 0.0);
    let delta = 1e-3;
    let beta = (at(0.0, delta).vv.d(1) - at(0.0, -delta).vv.d(1)) / (4.0 * delta);
    BoundaryConstants {
        omega: corner.rr.val,
        alpha: corner.rv.d(1),
        beta,
        m: corner.vv.d(0) / 4.0,
        mu: (0..k).map(|i| -2.0 * corner.ry[i].val).collect(),
        upsilon: (0..k).map(|i| -corner.vy[i].d(1)).collect(),
    }
}

fn check(name: &str, passed: bool, margin: f64, detail: String) -> InvariantCheck {
    InvariantCheck { name: name.to_string(), passed, margin, detail }
}

/// Check the structural invariants of a model on a fixed sample grid.
pub fn validate_model(model: &MetricModel) -> Result<ValidationReport> {
    let k = model.k();
    let ys = sphere_samples(model);
    let mut checks = Vec::new();

    // Sphere metric is positive definite.
    let mut min_eig = f64::INFINITY;
    for y in &ys {
        let yj: Vec<Jet> = y.iter().map(|&t| Jet::constant(t)).collect();
        let h = DMatrix::from_fn(k, k, |i, j| (model.h_inv[i * k + j])(&yj).val);
        let asym = (&h - h.transpose()).amax();
        let e = h.symmetric_eigen().eigenvalues.min();
        min_eig = min_eig.min(if asym > 1e-12 { f64::NEG_INFINITY } else { e });
    }
    checks.push(check(
        "sphere metric positive definite",
        min_eig > 0.0,
        min_eig,
        "smallest eigenvalue of h^{-1} over samples".into(),
    ));

    // Corner normalization.
    let mut dev: f64 = 0.0;
    for y in &ys {
        let d = model.dual_jet(&BasePoint::new(0.0, 0.0, y.clone()));
        dev = dev.max((d.rv.val + 2.0).abs()).max(d.vv.val.abs());
        for i in 0..k {
            dev = dev.max(d.vy[i].val.abs());
        }
    }
    checks.push(check(
        "corner normalization",
        dev <= NORMALIZATION_TOL,
        dev,
        "max |G^{rv}+2|, |G^{vv}|, |G^{vy}| at rho = v = 0".into(),
    ));

    // Lorentzian signature on the chart.
    let c = model.chart;
    let rhos = [0.0, 1e-3, 0.1 * c.rho_max, 0.5 * c.rho_max];
    let vs = [-0.5 * c.v_max, -0.1 * c.v_max, 0.0, 0.1 * c.v_max, 0.5 * c.v_max];
    let mut sig_ok = true;
    let mut sig_margin = f64::INFINITY;
    for y in &ys {
        for &r in &rhos {
            for &v in &vs {
                let g = dual_metric_matrix(model, &BasePoint::new(r, v, y.clone()))?;
                let e = g.symmetric_eigen().eigenvalues;
                let scale = e.amax();
                let pos = e.iter().filter(|&&x| x > 0.0).count();
                sig_ok &= pos == 1;
                sig_margin = sig_margin.min(e.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min) / scale);
            }
        }
    }
    checks.push(check(
        "lorentzian signature",
        sig_ok && sig_margin > 1e-12,
        sig_margin,
        "one positive eigenvalue; margin is min |eig| / max |eig|".into(),
    ));

    // Causal character of the scattering normal vector at rho = 0.
    let mut normal_ok = true;
    let mut normal_margin = f64::INFINITY;
    for y in &ys {
        for &v in &[-0.2 * c.v_max, -0.05 * c.v_max, 0.05 * c.v_max, 0.2 * c.v_max] {
            let g = dual_metric_matrix(model, &BasePoint::new(0.0, v, y.clone()))?;
            match g.try_inverse() {
                Some(gi) => {
                    let q = gi[(0, 0)] * v.signum();
                    normal_ok &= q > 0.0;
                    normal_margin = normal_margin.min(q / v.abs());
                }
                None => normal_ok = false,
            }
        }
    }
    checks.push(check(
        "normal vector causal character",
        normal_ok,
        normal_margin,
        "g(V, V) has the sign of v at rho = 0; margin is min g(V,V)/v".into(),
    ));

    // Remainder vanishing orders.
    let eps: Vec<f64> = (1..=6).map(|e| 10f64.powi(-e)).collect();
    let mut worst: f64 = 0.0;
    let mut offender = String::new();
    for rem in &model.remainders {
        let mut rem_worst: f64 = 0.0;
        for y in &ys {
            let yj: Vec<Jet> = y.iter().map(|&t| Jet::constant(t)).collect();
            for &e in &eps {
                let er = e * c.rho_max.min(1.0);
                let ev = e * c.v_max.min(1.0);
                for &(r, v) in &[(er, 0.0), (er, ev), (er, -ev), (0.0, ev), (0.0, -ev)] {
                    let val = (rem.f)(Jet::constant(r), Jet::constant(v), &yj).val.abs();
                    let bound: f64 = rem.orders.iter().map(|&(a, b)| r.powi(a as i32) * v.abs().powi(b as i32)).sum();
                    let excess = (val - REMAINDER_FLOOR).max(0.0);
                    let ratio = if excess == 0.0 { 0.0 } else if bound == 0.0 { f64::INFINITY } else { excess / bound };
                    rem_worst = rem_worst.max(ratio);
                }
            }
        }
        if rem_worst > worst {
            worst = rem_worst;
            offender = rem.slot.name();
        }
    }
    checks.push(check(
        "remainder vanishing order",
        worst <= REMAINDER_BOUND,
        worst,
        if offender.is_empty() { "all remainders bounded".into() } else { format!("largest ratio in slot {offender}") },
    ));

    // Declared boundary data is what the metric actually shows.
    let y0 = sphere_center(model);
    let constants = measure_constants(model, &y0);
    let yj: Vec<Jet> = y0.iter().map(|&t| Jet::constant(t)).collect();
    let mut cdev = (constants.omega - (model.omega)(&yj).val)
        .abs()
        .max((constants.alpha - (model.alpha)(&yj).val).abs())
        .max((constants.beta - (model.beta)(&yj).val).abs());
    for i in 0..k {
        cdev = cdev
            .max((constants.mu[i] - (model.mu[i])(&yj).val).abs())
            .max((constants.upsilon[i] - (model.upsilon[i])(&yj).val).abs());
    }
    checks.push(check(
        "boundary data consistent",
        cdev <= 1e-8,
        cdev,
        "measured omega, alpha, beta, mu, Upsilon against declared values".into(),
    ));

    Ok(ValidationReport { label: model.label.clone(), constants, checks })
}
