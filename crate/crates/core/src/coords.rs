//! Logarithmic change of smooth structure near the corner, blow-up
//! coordinates at null infinity, vector-field lifts, and a synthetic
//! polyhomogeneous function generator.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::indexsets::{IndexEntry, IndexSet};
use crate::{Error, Result};

fn e_inv(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

fn e_inv_prime(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        e_inv(x) / (x * x)
    }
}

/// Smooth even plateau: `chi = 1` on `|x| <= c1`, `chi = 0` on `|x| >= c_outer`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec {
    pub c1: f64,
    pub c_outer: f64,
}

impl Default for CutoffSpec {
    fn default() -> Self {
        CutoffSpec { c1: 0.25, c_outer: 0.75 }
    }
}

impl CutoffSpec {
    pub fn new(c1: f64, c_outer: f64) -> Result<Self> {
        if !(c1 > 0.0 && c1 < c_outer && c_outer.is_finite()) {
            return Err(Error::Precondition(format!("cutoff needs 0 < c1 < C, got ({c1}, {c_outer})")));
        }
        Ok(CutoffSpec { c1, c_outer })
    }

    fn ramp(&self, x: f64) -> f64 {
        (x.abs() - self.c1) / (self.c_outer - self.c1)
    }

    pub fn value(&self, x: f64) -> f64 {
        let t = self.ramp(x);
        if t <= 0.0 {
            return 1.0;
        }
        if t >= 1.0 {
            return 0.0;
        }
        let (a, b) = (e_inv(t), e_inv(1.0 - t));
        b / (a + b)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let t = self.ramp(x);
        if t <= 0.0 || t >= 1.0 {
            return 0.0;
        }
        let (a, b) = (e_inv(t), e_inv(1.0 - t));
        let (da, db) = (e_inv_prime(t), e_inv_prime(1.0 - t));
        // d/dt of b / (a + b), with b' = -db.
        let dt = -(db * a + b * da) / ((a + b) * (a + b));
        dt * x.signum() / (self.c_outer - self.c1)
    }

    /// `sup |chi'|`, attained at the midpoint of the ramp.
    pub fn max_slope(&self) -> f64 {
        2.0 / (self.c_outer - self.c1)
    }
}

fn rho_log_rho(rho: f64) -> f64 {
    if rho == 0.0 {
        0.0
    } else {
        rho * rho.ln()
    }
}

/// `(rho, v) -> (rho_bar, v_bar) = (rho, v + chi(v) m rho log rho)`.
pub fn logify_point(rho: f64, v: f64, m: f64, chi: &CutoffSpec) -> Result<(f64, f64)> {
    if !(rho >= 0.0) {
        return Err(Error::Precondition(format!("rho must be nonnegative, got {rho}")));
    }
    Ok((rho, v + chi.value(v) * m * rho_log_rho(rho)))
}

/// Inverse of [`logify_point`] in `v` at fixed `rho`, by Newton iteration.
pub fn unlogify_point(rho_bar: f64, v_bar: f64, m: f64, chi: &CutoffSpec) -> Result<(f64, f64)> {
    if !(rho_bar >= 0.0) {
        return Err(Error::Precondition(format!("rho must be nonnegative, got {rho_bar}")));
    }
    let rl = m * rho_log_rho(rho_bar);
    if rl == 0.0 {
        return Ok((rho_bar, v_bar));
    }
    if rl.abs() * chi.max_slope() >= 1.0 {
        return Err(Error::Precondition(format!(
            "v -> v_bar is not monotone at rho = {rho_bar} (|m rho log rho| sup|chi'| = {})",
            rl.abs() * chi.max_slope()
        )));
    }
    let tol = 1e-14 * v_bar.abs().max(1.0);
    let mut v = v_bar - chi.value(v_bar) * rl;
    for _ in 0..100 {
        let g = v + chi.value(v) * rl - v_bar;
        if g.abs() <= tol {
            return Ok((rho_bar, v));
        }
        v -= g / (1.0 + chi.derivative(v) * rl);
    }
    let g = v + chi.value(v) * rl - v_bar;
    if g.abs() <= 1e-12 {
        return Ok((rho_bar, v));
    }
    Err(Error::NoConvergence(format!("inversion residual {g:e} at rho = {rho_bar}, v_bar = {v_bar}")))
}

/// Coordinates on the blown-up corner: `s = v_bar / rho_bar`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlowupPoint {
    pub s: f64,
    pub rho_bar: f64,
    pub y: Vec<f64>,
}

impl BlowupPoint {
    pub fn from_logified(rho_bar: f64, v_bar: f64, y: Vec<f64>) -> Result<Self> {
        if !(rho_bar > 0.0) {
            return Err(Error::Precondition("s = v_bar / rho_bar needs rho_bar > 0".into()));
        }
        Ok(BlowupPoint { s: v_bar / rho_bar, rho_bar, y })
    }

    pub fn v_bar(&self) -> f64 {
        self.s * self.rho_bar
    }

    /// `rho_bar / v_bar = 1/s`, when `s != 0`.
    pub fn varpi(&self) -> Option<f64> {
        (self.s != 0.0).then(|| 1.0 / self.s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    /// `rho d_rho`
    RhoDRho,
    /// `v d_v`
    VDv,
    /// `rho d_v`
    RhoDv,
}

/// Coefficients of a lifted field over
/// `d_s, log(rho_bar) d_s, rho_bar d_rho_bar, rho_bar log(rho_bar) d_rho_bar`.
///
/// Every term containing `log(rho_bar)` is collected in the second slot.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LiftCoefficients {
    pub ds: f64,
    pub log_ds: f64,
    pub rho_drho: f64,
    pub rho_log_drho: f64,
}

impl LiftCoefficients {
    /// Apply to `f(s, rho_bar)` given its partial derivatives there.
    pub fn apply(&self, rho_bar: f64, df_ds: f64, df_drho: f64) -> f64 {
        let l = rho_bar.ln();
        (self.ds + self.log_ds * l) * df_ds + (self.rho_drho + self.rho_log_drho * l) * rho_bar * df_drho
    }
}

/// Lift of a module generator through the logarithmic coordinate change and
/// the blow-up `s = v_bar / rho_bar`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Lift {
    pub which: Generator,
    pub m: f64,
    pub chi: CutoffSpec,
}

pub fn lift_module_generator(which: Generator, m: f64, chi: CutoffSpec) -> Lift {
    Lift { which, m, chi }
}

impl Lift {
    /// Coefficients at `(s, rho_bar)`; `v` is the original light-cone
    /// coordinate of that point, at which `chi` and `chi'` are evaluated.
    pub fn at(&self, s: f64, rho_bar: f64, v: f64) -> LiftCoefficients {
        let m = self.m;
        let (c, dc) = (self.chi.value(v), self.chi.derivative(v));
        let rl = rho_log_rho(rho_bar);
        match self.which {
            Generator::RhoDRho => LiftCoefficients { ds: c * m - s, log_ds: c * m, rho_drho: 1.0, rho_log_drho: 0.0 },
            // (s - chi m L)(1 + chi' m rho L)
            Generator::VDv => LiftCoefficients {
                ds: s,
                log_ds: s * dc * m * rho_bar - c * m * (1.0 + dc * m * rl),
                rho_drho: 0.0,
                rho_log_drho: 0.0,
            },
            // 1 + chi' m rho L
            Generator::RhoDv => LiftCoefficients { ds: 1.0, log_ds: dc * m * rho_bar, rho_drho: 0.0, rho_log_drho: 0.0 },
        }
    }

    /// Coefficients at a blow-up point, recovering `v` by inversion.
    pub fn at_point(&self, p: &BlowupPoint) -> Result<LiftCoefficients> {
        let (_, v) = unlogify_point(p.rho_bar, p.v_bar(), self.m, &self.chi)?;
        Ok(self.at(p.s, p.rho_bar, v))
    }
}

/// `rho^{iz} (log rho)^k` for `rho > 0`.
pub fn phg_term(entry: &IndexEntry, rho: f64) -> Complex64 {
    let l = rho.ln();
    let z = entry.z.to_complex();
    (Complex64::i() * z * l).exp() * l.powi(entry.k as i32)
}

/// `sum over (z, k) in E of rho^{iz} (log rho)^k a_{z,k}(x)` at one point.
pub fn phg_value<F>(e: &IndexSet, coef: &F, rho: f64, x: f64) -> Complex64
where
    F: Fn(&IndexEntry, f64) -> Complex64,
{
    e.entries().iter().map(|en| phg_term(en, rho) * coef(en, x)).sum()
}

/// Finite polyhomogeneous sum sampled on the grid `rho x x` (row per `rho`).
pub fn synth_phg<F>(e: &IndexSet, coef: F, rho: &[f64], x: &[f64]) -> Vec<Vec<Complex64>>
where
    F: Fn(&IndexEntry, f64) -> Complex64,
{
    let entries = e.entries();
    rho.iter()
        .map(|&r| {
            let terms: Vec<Complex64> = entries.iter().map(|en| phg_term(en, r)).collect();
            x.iter().map(|&xv| entries.iter().zip(&terms).map(|(en, t)| t * coef(en, xv)).sum()).collect()
        })
        .collect()
}
