//! Hamilton flow of the metric symbol on the b-cotangent bundle.
//!
//! Fiber coordinates `(xi, gamma, eta)` are dual to `d rho / rho, dv, dy`.
//! Near fiber infinity we use `nu = 1/gamma`, `xi_hat = nu xi`,
//! `eta_hat = nu eta`, in which the rescaled field `nu H` is smooth up to
//! `nu = 0`. The radial set over the corner is
//! `rho = v = nu = xi_hat = eta_hat = 0`.

mod linearize;
mod nontrapping;
mod trace;

pub use linearize::{linearization, linearization_at, CovectorCheck, EigenCluster, LinearizationReport};
pub use nontrapping::{check_nontrapping, null_seed, NonTrappingReport, SeedOutcome};
pub use trace::{
    trace_bicharacteristic, trace_bicharacteristic_with, Bicharacteristic, FlowPoint, Termination, TraceOptions,
};

use serde::Serialize;

use crate::geometry::{BasePoint, MetricModel};
use crate::{Error, Result};

/// Point of the b-cotangent bundle with finite fiber coordinates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CotangentPoint {
    pub rho: f64,
    pub v: f64,
    pub y: Vec<f64>,
    pub xi: f64,
    pub gamma: f64,
    pub eta: Vec<f64>,
}

/// Point near fiber infinity in compactified fiber coordinates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompactPoint {
    pub rho: f64,
    pub v: f64,
    pub y: Vec<f64>,
    pub nu: f64,
    pub xi_hat: f64,
    pub eta_hat: Vec<f64>,
}

impl CotangentPoint {
    pub fn base(&self) -> BasePoint {
        BasePoint::new(self.rho, self.v, self.y.clone())
    }

    pub fn fiber(&self) -> Vec<f64> {
        let mut f = vec![self.xi, self.gamma];
        f.extend_from_slice(&self.eta);
        f
    }

    /// `(nu, xi_hat, eta_hat)`; requires `gamma != 0`.
    pub fn compactified(&self) -> Result<CompactPoint> {
        if self.gamma == 0.0 {
            return Err(Error::Precondition("compactified fiber coordinates need gamma != 0".into()));
        }
        let nu = 1.0 / self.gamma;
        Ok(CompactPoint {
            rho: self.rho,
            v: self.v,
            y: self.y.clone(),
            nu,
            xi_hat: self.xi / self.gamma,
            eta_hat: self.eta.iter().map(|e| e / self.gamma).collect(),
        })
    }
}

impl CompactPoint {
    pub fn base(&self) -> BasePoint {
        BasePoint::new(self.rho, self.v, self.y.clone())
    }

    /// Finite fiber coordinates; requires `nu != 0`.
    pub fn expanded(&self) -> Result<CotangentPoint> {
        if self.nu == 0.0 {
            return Err(Error::Precondition("point lies at fiber infinity".into()));
        }
        let g = 1.0 / self.nu;
        Ok(CotangentPoint {
            rho: self.rho,
            v: self.v,
            y: self.y.clone(),
            xi: self.xi_hat * g,
            gamma: g,
            eta: self.eta_hat.iter().map(|e| e * g).collect(),
        })
    }

    /// Fiber direction `(xi_hat, 1, eta_hat)`.
    pub fn direction(&self) -> Vec<f64> {
        let mut f = vec![self.xi_hat, 1.0];
        f.extend_from_slice(&self.eta_hat);
        f
    }
}

/// Coefficients of `H_lambda` over
/// `(rho d_rho, d_v, d_y, d_xi, d_gamma, d_eta)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HamiltonVector {
    pub rho_drho: f64,
    pub dv: f64,
    pub dy: Vec<f64>,
    pub dxi: f64,
    pub dgamma: f64,
    pub deta: Vec<f64>,
}

/// `H = (d_xi l) rho d_rho + (d_gamma l) d_v + (d_eta l) d_y
///      - (rho d_rho l) d_xi - (d_v l) d_gamma - (d_y l) d_eta`.
pub fn hamilton_vector(model: &MetricModel, p: &CotangentPoint) -> Result<HamiltonVector> {
    let base = p.base();
    model.check_point(&base)?;
    let s = model.symbol_derivatives(&base, &p.fiber());
    Ok(HamiltonVector {
        rho_drho: s.d_xi,
        dv: s.d_gamma,
        dy: s.d_eta.clone(),
        dxi: -p.rho * s.d_rho,
        dgamma: -s.d_v,
        deta: s.d_y.iter().map(|d| -d).collect(),
    })
}

/// Symbol normalised by the Euclidean fiber norm, invariant under
/// fiber rescaling and hence continuous across the compactification.
pub fn normalized_symbol(model: &MetricModel, base: &BasePoint, fiber: &[f64]) -> f64 {
    let n2: f64 = fiber.iter().map(|x| x * x).sum();
    if n2 == 0.0 {
        return 0.0;
    }
    model.symbol_derivatives(base, fiber).lambda / n2
}

/// Rescaled field `nu H` in `(rho, v, y, nu, xi_hat, eta_hat)`, written into
/// `out` in that order. Smooth up to `nu = 0`; no chart check.
pub fn rescaled_field(model: &MetricModel, q: &CompactPoint, out: &mut [f64]) {
    let k = model.k();
    let base = q.base();
    let s = model.symbol_derivatives(&base, &q.direction());
    let big_gamma = -s.d_v;
    let big_xi = -q.rho * s.d_rho;
    out[0] = q.rho * s.d_xi;
    out[1] = s.d_gamma;
    for i in 0..k {
        out[2 + i] = s.d_eta[i];
    }
    out[2 + k] = -q.nu * big_gamma;
    out[3 + k] = -big_gamma * q.xi_hat + big_xi;
    for i in 0..k {
        out[4 + k + i] = -big_gamma * q.eta_hat[i] - s.d_y[i];
    }
}

/// Euclidean norm of `(rho, v, xi_hat, |eta_hat|)`.
pub fn radial_distance(p: &CotangentPoint) -> Result<f64> {
    Ok(compact_radial_distance(&p.compactified()?))
}

pub fn compact_radial_distance(q: &CompactPoint) -> f64 {
    let e2: f64 = q.eta_hat.iter().map(|x| x * x).sum();
    (q.rho * q.rho + q.v * q.v + q.xi_hat * q.xi_hat + e2).sqrt()
}
