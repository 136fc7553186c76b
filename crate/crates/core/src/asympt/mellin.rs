use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coords::CutoffSpec;
use crate::numerics::quad::{g7_weights, gk15_rule};
use crate::{Error, Result};

/// Largest `x = -log rho` reached before declaring the integral divergent.
const X_MAX: f64 = 700.0;

/// Cutoff multiplying the function before transforming.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MellinCutoff {
    /// Smooth plateau in `rho`.
    Smooth(CutoffSpec),
    /// Indicator of `(0, rho_max]`.
    Sharp { rho_max: f64 },
}

impl Default for MellinCutoff {
    fn default() -> Self {
        MellinCutoff::Smooth(CutoffSpec::default())
    }
}

impl MellinCutoff {
    fn support(&self) -> f64 {
        match self {
            MellinCutoff::Smooth(c) => c.c_outer,
            MellinCutoff::Sharp { rho_max } => *rho_max,
        }
    }

    fn value(&self, rho: f64) -> f64 {
        match self {
            MellinCutoff::Smooth(c) => c.value(rho),
            MellinCutoff::Sharp { rho_max } => {
                if rho <= *rho_max {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// `x = -log rho` where the cutoff stops varying.
    fn plateau_x(&self) -> f64 {
        match self {
            MellinCutoff::Smooth(c) => -c.c1.ln(),
            MellinCutoff::Sharp { rho_max } => -rho_max.ln(),
        }
    }
}

/// `u~(sigma) = int chi(rho) u(rho) rho^{-i sigma - 1} d rho` on a set of
/// `sigma`, with absolute error estimates.
#[derive(Clone, Debug, Serialize)]
pub struct MellinSlice {
    pub sigma: Vec<Complex64>,
    pub values: Vec<Complex64>,
    pub errors: Vec<f64>,
    pub cutoff: MellinCutoff,
}

impl MellinSlice {
    /// Discrete Cauchy-Riemann residual `|d/d Re + i d/d Im|` estimated from
    /// a companion slice shifted by `i h`. Small where the transform is
    /// holomorphic.
    pub fn cauchy_riemann_residual(&self, shifted: &MellinSlice, h: f64) -> Vec<f64> {
        let n = self.sigma.len();
        (1..n.saturating_sub(1))
            .map(|j| {
                let dre = (self.values[j + 1] - self.values[j - 1]) / (self.sigma[j + 1].re - self.sigma[j - 1].re);
                let dim = (shifted.values[j] - self.values[j]) / h;
                (dre + Complex64::i() * dim).norm()
            })
            .collect()
    }
}

fn gk15_complex<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let (x, wk) = gk15_rule(a, b);
    let wg = g7_weights(a, b);
    let mut k = Complex64::new(0.0, 0.0);
    let mut g = Complex64::new(0.0, 0.0);
    for i in 0..15 {
        let fx = f(x[i]);
        k += wk[i] * fx;
        g += wg[i] * fx;
    }
    (k, (k - g).norm())
}

fn adaptive<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, tol: f64, whole: (Complex64, f64), depth: u32) -> (Complex64, f64) {
    let (v, e) = whole;
    if e <= tol || depth >= 40 {
        return (v, e);
    }
    let m = 0.5 * (a + b);
    let l = gk15_complex(f, a, m);
    let r = gk15_complex(f, m, b);
    let (lv, le) = adaptive(f, a, m, 0.5 * tol, l, depth + 1);
    let (rv, re) = adaptive(f, m, b, 0.5 * tol, r, depth + 1);
    (lv + rv, le + re)
}

/// Transform at one `sigma`, integrating in `x = -log rho` over unit panels
/// until the tail is negligible.
pub fn mellin_at<F>(u: &F, cutoff: &MellinCutoff, sigma: Complex64, tol: f64) -> Result<(Complex64, f64)>
where
    F: Fn(f64) -> Complex64 + Sync,
{
    let g = |x: f64| {
        let rho = (-x).exp();
        u(rho) * cutoff.value(rho) * (Complex64::i() * sigma * x).exp()
    };
    let mut x = -cutoff.support().ln();
    let plateau = cutoff.plateau_x();
    let mut total = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    let mut quiet = 0;
    let mut last = f64::INFINITY;
    let mut growth = 0;
    while x < X_MAX {
        let b = if x < plateau { plateau.min(x + 1.0) } else { x + 1.0 };
        let whole = gk15_complex(&g, x, b);
        let (v, e) = adaptive(&g, x, b, tol * 1e-2, whole, 0);
        total += v;
        err += e;
        let mag = v.norm();
        if x >= plateau {
            if mag <= tol * 1e-3 * total.norm().max(1.0) {
                quiet += 1;
                if quiet >= 3 {
                    return Ok((total, err + mag));
                }
            } else {
                quiet = 0;
            }
            // Panels that keep growing signal a divergent integral.
            if mag > last * (1.0 + 1e-9) && mag > tol {
                growth += 1;
                if growth >= 8 {
                    break;
                }
            } else {
                growth = 0;
            }
            last = mag;
        }
        x = b;
    }
    Err(Error::NotIntegrable(format!("Mellin integral does not converge at sigma = {sigma}")))
}

/// Mellin transform of `chi u` on the given `sigma` values.
pub fn mellin<F>(u: F, cutoff: MellinCutoff, sigma: &[Complex64], tol: f64) -> Result<MellinSlice>
where
    F: Fn(f64) -> Complex64 + Sync,
{
    let res: Result<Vec<(Complex64, f64)>> = sigma.par_iter().map(|&s| mellin_at(&u, &cutoff, s, tol)).collect();
    let res = res?;
    Ok(MellinSlice {
        sigma: sigma.to_vec(),
        values: res.iter().map(|r| r.0).collect(),
        errors: res.iter().map(|r| r.1).collect(),
        cutoff,
    })
}

/// `n` equally spaced points on the horizontal line `Im sigma = im`,
/// `Re sigma` in `[re_min, re_max]`.
pub fn sigma_line(im: f64, re_min: f64, re_max: f64, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|j| Complex64::new(re_min + (re_max - re_min) * j as f64 / (n.max(2) - 1) as f64, im))
        .collect()
}
