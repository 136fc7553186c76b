use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use crate::numerics::lstsq::weighted_lstsq;
use crate::solver::NullSlice;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitOptions {
    pub rho_min: f64,
    pub rho_max: f64,
    /// Number of `rho^2 log^j rho` columns (`j = 0 .. absorber`) appended to
    /// absorb next-order contamination; 0 disables the block.
    pub absorber: usize,
    pub cond_bound: f64,
    pub min_samples: usize,
    pub min_octaves: f64,
    /// Largest relative change of `w_1^2` under halving `rho_max` for the fit
    /// to count as converged.
    pub stability_tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            rho_min: 1e-4,
            rho_max: 1e-2,
            absorber: 3,
            cond_bound: 1e12,
            min_samples: 8,
            min_octaves: 3.0,
            stability_tol: 0.1,
        }
    }
}

/// Per-`s` coefficients of `w ~ w0 + w10 rho + w11 rho log rho + w12 rho log^2 rho`.
#[derive(Clone, Debug, Serialize)]
pub struct ExpansionFit {
    pub s: Vec<f64>,
    pub w0: Vec<f64>,
    pub w1_0: Vec<f64>,
    pub w1_1: Vec<f64>,
    pub w1_2: Vec<f64>,
    /// RMS fit residual relative to `max |w|` on the slice.
    pub residual: Vec<f64>,
    pub cond: Vec<f64>,
    pub ill_conditioned: Vec<bool>,
    /// `w1_2` refitted with `rho_max` halved.
    pub w1_2_halved: Vec<f64>,
    pub converged: Vec<bool>,
    pub samples: Vec<usize>,
    pub options: FitOptions,
}

impl ExpansionFit {
    pub fn max_abs(v: &[f64]) -> f64 {
        v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }
}

struct SliceFit {
    coef: Vec<f64>,
    residual: f64,
    cond: f64,
    n: usize,
}

fn basis_row(rho: f64, absorber: usize) -> Vec<f64> {
    let l = rho.ln();
    let mut row = vec![1.0, rho, rho * l, rho * l * l];
    let mut p = rho * rho;
    for _ in 0..absorber {
        row.push(p);
        p *= l;
    }
    row
}

fn fit_one(slice: &NullSlice, rho_min: f64, rho_max: f64, opts: &FitOptions) -> Result<SliceFit> {
    let pick: Vec<(f64, f64)> = slice
        .rho
        .iter()
        .zip(&slice.w)
        .filter(|(r, _)| **r >= rho_min * (1.0 - 1e-9) && **r <= rho_max * (1.0 + 1e-9))
        .map(|(r, w)| (*r, *w))
        .collect();
    let ncol = 4 + opts.absorber;
    if pick.len() < opts.min_samples.max(ncol + 1) {
        return Err(Error::InsufficientData(format!("{} samples in [{rho_min}, {rho_max}] at s = {}", pick.len(), slice.s)));
    }
    let (lo, hi) = pick.iter().fold((f64::INFINITY, 0.0f64), |(a, b), (r, _)| (a.min(*r), b.max(*r)));
    if (hi / lo).log2() < opts.min_octaves - 1e-9 {
        return Err(Error::InsufficientData(format!("samples span {:.2} octaves at s = {}", (hi / lo).log2(), slice.s)));
    }
    let a = DMatrix::from_fn(pick.len(), ncol, |i, j| basis_row(pick[i].0, opts.absorber)[j]);
    let b: Vec<f64> = pick.iter().map(|p| p.1).collect();
    let scale = b.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return Ok(SliceFit { coef: vec![0.0; ncol], residual: 0.0, cond: 1.0, n: pick.len() });
    }
    let sol = weighted_lstsq(&a, &b, None)?;
    Ok(SliceFit { coef: sol.coef, residual: sol.rms_residual / scale, cond: sol.cond, n: pick.len() })
}

/// Weighted least squares of each slice against `{1, rho, rho log rho,
/// rho log^2 rho}` (plus the optional `rho^2 log^j rho` block) on
/// `[rho_min, rho_max]`, with a refit on the halved window as a stability
/// check.
pub fn fit_front_face(slices: &[NullSlice], opts: &FitOptions) -> Result<ExpansionFit> {
    if slices.is_empty() {
        return Err(Error::InsufficientData("no slices".into()));
    }
    let fits: Vec<(SliceFit, Option<SliceFit>)> = slices
        .par_iter()
        .map(|sl| {
            let full = fit_one(sl, opts.rho_min, opts.rho_max, opts)?;
            let half = fit_one(sl, opts.rho_min, 0.5 * opts.rho_max, opts).ok();
            Ok((full, half))
        })
        .collect::<Result<_>>()?;
    let mut out = ExpansionFit {
        s: slices.iter().map(|s| s.s).collect(),
        w0: vec![],
        w1_0: vec![],
        w1_1: vec![],
        w1_2: vec![],
        residual: vec![],
        cond: vec![],
        ill_conditioned: vec![],
        w1_2_halved: vec![],
        converged: vec![],
        samples: vec![],
        options: *opts,
    };
    let w12_scale = fits.iter().fold(0.0f64, |m, (f, _)| m.max(f.coef[3].abs()));
    for (f, h) in &fits {
        out.w0.push(f.coef[0]);
        out.w1_0.push(f.coef[1]);
        out.w1_1.push(f.coef[2]);
        out.w1_2.push(f.coef[3]);
        out.residual.push(f.residual);
        out.cond.push(f.cond);
        let ill = !(f.cond <= opts.cond_bound);
        out.ill_conditioned.push(ill);
        let halved = h.as_ref().map_or(f64::NAN, |h| h.coef[3]);
        out.w1_2_halved.push(halved);
        let drift = (halved - f.coef[3]).abs() / f.coef[3].abs().max(0.1 * w12_scale).max(f64::MIN_POSITIVE);
        out.converged.push(!ill && drift <= opts.stability_tol);
        out.samples.push(f.n);
    }
    Ok(out)
}

/// Constants of the boundary metric entering the log coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogConstants {
    pub m: f64,
    pub omega: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl LogConstants {
    /// Schwarzschild / Kerr of mass `mass`.
    pub fn kerr(mass: f64) -> Self {
        LogConstants { m: 4.0 * mass, omega: 1.0, alpha: 2.0, beta: 4.0 }
    }

    /// `(m^2 / 4)(omega - 2 alpha + beta)`.
    pub fn factor(&self) -> f64 {
        0.25 * self.m * self.m * (self.omega - 2.0 * self.alpha + self.beta)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LogCoefficientReport {
    pub s: Vec<f64>,
    pub dw0: Vec<f64>,
    pub w1_2: Vec<f64>,
    /// `-(m^2/4)(omega - 2 alpha + beta) d_s w0`.
    pub target: Vec<f64>,
    /// `|w1_2 - target| / |target|`; `None` where `|d_s w0|` is below the
    /// threshold (or at the two end points on each side). For `m = 0` it is
    /// the absolute value `|w1_2|`.
    pub rel_residual: Vec<Option<f64>>,
    /// The same with the opposite sign of the target.
    pub flipped_rel_residual: Vec<Option<f64>>,
    pub excluded: Vec<f64>,
    pub max_rel_residual: f64,
    pub max_flipped_rel_residual: f64,
    /// `max |4 d_s w1_2 + 4 factor d_s^2 w0| / max |4 factor d_s^2 w0|` over
    /// interior points.
    pub integrated_residual: f64,
    pub integrated_flipped_residual: f64,
    pub threshold: f64,
    pub constants: LogConstants,
}

impl LogCoefficientReport {
    pub fn to_csv(&self, fit: &ExpansionFit) -> String {
        let mut out = String::from("s,w0,w1_0,w1_1,w1_2,residual,cond,target_w1_2,rel_residual\n");
        for i in 0..self.s.len() {
            let rel = self.rel_residual[i].map_or(String::from("nan"), |r| format!("{r:.6e}"));
            let _ = writeln!(
                out,
                "{:.10e},{:.15e},{:.15e},{:.15e},{:.15e},{:.3e},{:.3e},{:.15e},{}",
                self.s[i], fit.w0[i], fit.w1_0[i], fit.w1_1[i], fit.w1_2[i], fit.residual[i], fit.cond[i], self.target[i], rel
            );
        }
        out
    }
}

/// 4th-order central differences on a uniform grid; `NaN` at the two end
/// points on each side.
pub fn central_diff4(y: &[f64], h: f64) -> Vec<f64> {
    let n = y.len();
    (0..n)
        .map(|i| {
            if i < 2 || i + 2 >= n {
                f64::NAN
            } else {
                (y[i - 2] - 8.0 * y[i - 1] + 8.0 * y[i + 1] - y[i + 2]) / (12.0 * h)
            }
        })
        .collect()
}

fn uniform_step(s: &[f64]) -> Result<f64> {
    if s.len() < 5 {
        return Err(Error::InsufficientData("need at least 5 values of s".into()));
    }
    let h = s[1] - s[0];
    if !(h > 0.0) || s.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h.abs().max(1.0)) {
        return Err(Error::Precondition("s values must be uniformly spaced and increasing".into()));
    }
    Ok(h)
}

/// Compare `w1_2` with `-(m^2/4)(omega - 2 alpha + beta) d_s w0` wherever
/// `|d_s w0| >= threshold max |d_s w0|`.
pub fn verify_log_coefficient(fit: &ExpansionFit, k: &LogConstants, threshold: f64) -> Result<LogCoefficientReport> {
    let h = uniform_step(&fit.s)?;
    let c = k.factor();
    let dw0 = central_diff4(&fit.w0, h);
    let d2w0 = central_diff4(&dw0, h);
    let dw12 = central_diff4(&fit.w1_2, h);
    let dmax = dw0.iter().filter(|x| x.is_finite()).fold(0.0f64, |m, x| m.max(x.abs()));
    let n = fit.s.len();
    let target: Vec<f64> = dw0.iter().map(|d| -c * d).collect();
    let mut rel = vec![None; n];
    let mut flipped = vec![None; n];
    let mut excluded = Vec::new();
    for i in 0..n {
        if c == 0.0 {
            rel[i] = Some(fit.w1_2[i].abs());
            flipped[i] = rel[i];
            continue;
        }
        if !dw0[i].is_finite() || dw0[i].abs() < threshold * dmax || dmax == 0.0 {
            excluded.push(fit.s[i]);
            continue;
        }
        rel[i] = Some(((fit.w1_2[i] - target[i]) / target[i]).abs());
        flipped[i] = Some(((fit.w1_2[i] + target[i]) / target[i]).abs());
    }
    let fold = |v: &[Option<f64>]| v.iter().flatten().fold(0.0f64, |m, x| m.max(*x));
    let (mut num, mut num_f, mut den) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..n {
        if dw12[i].is_finite() && d2w0[i].is_finite() {
            num = num.max((4.0 * dw12[i] + 4.0 * c * d2w0[i]).abs());
            num_f = num_f.max((4.0 * dw12[i] - 4.0 * c * d2w0[i]).abs());
            den = den.max((4.0 * c * d2w0[i]).abs());
        }
    }
    let ratio = |x: f64| if den > 0.0 { x / den } else { x };
    Ok(LogCoefficientReport {
        s: fit.s.clone(),
        dw0,
        w1_2: fit.w1_2.clone(),
        target,
        max_rel_residual: fold(&rel),
        max_flipped_rel_residual: fold(&flipped),
        rel_residual: rel,
        flipped_rel_residual: flipped,
        excluded,
        integrated_residual: ratio(num),
        integrated_flipped_residual: ratio(num_f),
        threshold,
        constants: *k,
    })
}
