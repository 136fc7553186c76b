use serde::Serialize;

use super::{compact_radial_distance, normalized_symbol, rescaled_field, CompactPoint, CotangentPoint};
use crate::geometry::{BasePoint, MetricModel};
use crate::numerics::ode::Dopri5;
use crate::{Error, Result};

/// Switch to compactified fiber coordinates above this `|gamma|`.
pub const COMPACTIFY_ABOVE: f64 = 1e3;
/// Switch back to finite fiber coordinates above this `|nu|`.
pub const EXPAND_ABOVE: f64 = 1e-2;
/// Consecutive accepted steps inside the tolerance ball needed to call the
/// radial set reached.
pub const REACHED_STEPS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    ReachedRadialSet,
    LeftChart,
    HorizonExhausted,
}

#[derive(Clone, Copy, Debug)]
pub struct TraceOptions {
    /// Require `|lambda(p0)| <= tol` (normalised symbol).
    pub null: bool,
    pub tol: f64,
    pub ode: Dopri5,
    pub max_steps: usize,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions {
            null: true,
            tol: 1e-3,
            ode: Dopri5 { rtol: 1e-11, atol: 1e-13, h_min: 1e-13, h_max: 0.5 },
            max_steps: 200_000,
        }
    }
}

/// Sample along a traced curve.
#[derive(Clone, Debug, Serialize)]
pub enum FlowPoint {
    Finite(CotangentPoint),
    Compact(CompactPoint),
}

impl FlowPoint {
    pub fn base(&self) -> BasePoint {
        match self {
            FlowPoint::Finite(p) => p.base(),
            FlowPoint::Compact(q) => q.base(),
        }
    }

    /// Compactified form, if `gamma != 0`.
    pub fn compact(&self) -> Option<CompactPoint> {
        match self {
            FlowPoint::Finite(p) => p.compactified().ok(),
            FlowPoint::Compact(q) => Some(q.clone()),
        }
    }

    pub fn radial_distance(&self) -> Option<f64> {
        self.compact().map(|q| compact_radial_distance(&q))
    }
}

/// Integral curve of the Hamilton field. Flow parameters are those of `H`
/// while the fiber is finite and of `|nu| H` after compactification.
#[derive(Clone, Debug, Serialize)]
pub struct Bicharacteristic {
    pub params: Vec<f64>,
    pub points: Vec<FlowPoint>,
    /// Symbol divided by the squared Euclidean fiber norm.
    pub lambda: Vec<f64>,
    pub termination: Termination,
}

impl Bicharacteristic {
    pub fn max_abs_lambda(&self) -> f64 {
        self.lambda.iter().fold(0.0, |a, &l| a.max(l.abs()))
    }

    pub fn final_radial_distance(&self) -> Option<f64> {
        self.points.last().and_then(|p| p.radial_distance())
    }

    /// CSV with columns `param, rho, v, y.., nu, xi_hat, eta_hat.., lambda`.
    /// Fiber columns are blank where `gamma = 0`.
    pub fn to_csv(&self, k: usize) -> String {
        let mut s = String::from("param,rho,v");
        for i in 0..k {
            s.push_str(&format!(",y{i}"));
        }
        s.push_str(",nu,xi_hat");
        for i in 0..k {
            s.push_str(&format!(",eta_hat{i}"));
        }
        s.push_str(",lambda\n");
        for ((t, p), l) in self.params.iter().zip(&self.points).zip(&self.lambda) {
            let b = p.base();
            s.push_str(&format!("{t:e},{:e},{:e}", b.rho, b.v));
            for y in &b.y {
                s.push_str(&format!(",{y:e}"));
            }
            match p.compact() {
                Some(q) => {
                    s.push_str(&format!(",{:e},{:e}", q.nu, q.xi_hat));
                    for e in &q.eta_hat {
                        s.push_str(&format!(",{e:e}"));
                    }
                }
                None => s.push_str(&",".repeat(k + 2)),
            }
            s.push_str(&format!(",{l:e}\n"));
        }
        s
    }
}

fn pack_finite(p: &CotangentPoint) -> Vec<f64> {
    let mut x = vec![p.rho, p.v];
    x.extend_from_slice(&p.y);
    x.push(p.xi);
    x.push(p.gamma);
    x.extend_from_slice(&p.eta);
    x
}

fn unpack_finite(x: &[f64], k: usize) -> CotangentPoint {
    CotangentPoint {
        rho: x[0],
        v: x[1],
        y: x[2..2 + k].to_vec(),
        xi: x[2 + k],
        gamma: x[3 + k],
        eta: x[4 + k..4 + 2 * k].to_vec(),
    }
}

fn pack_compact(q: &CompactPoint) -> Vec<f64> {
    let mut x = vec![q.rho, q.v];
    x.extend_from_slice(&q.y);
    x.push(q.nu);
    x.push(q.xi_hat);
    x.extend_from_slice(&q.eta_hat);
    x
}

fn unpack_compact(x: &[f64], k: usize) -> CompactPoint {
    CompactPoint {
        rho: x[0],
        v: x[1],
        y: x[2..2 + k].to_vec(),
        nu: x[2 + k],
        xi_hat: x[3 + k],
        eta_hat: x[4 + k..4 + 2 * k].to_vec(),
    }
}

fn finite_field(model: &MetricModel, x: &[f64], out: &mut [f64]) {
    let k = model.k();
    let p = unpack_finite(x, k);
    let s = model.symbol_derivatives(&p.base(), &p.fiber());
    out[0] = p.rho * s.d_xi;
    out[1] = s.d_gamma;
    for i in 0..k {
        out[2 + i] = s.d_eta[i];
    }
    out[2 + k] = -p.rho * s.d_rho;
    out[3 + k] = -s.d_v;
    for i in 0..k {
        out[4 + k + i] = -s.d_y[i];
    }
}

fn compact_field(model: &MetricModel, x: &[f64], out: &mut [f64]) {
    let k = model.k();
    let q = unpack_compact(x, k);
    rescaled_field(model, &q, out);
    // |nu| H keeps the orientation of H for negative nu.
    if q.nu < 0.0 {
        for o in out.iter_mut() {
            *o = -*o;
        }
    }
}

/// Trace with default options and the given tolerance.
pub fn trace_bicharacteristic(
    model: &MetricModel,
    p0: &CotangentPoint,
    horizon: f64,
    tol: f64,
) -> Result<Bicharacteristic> {
    trace_bicharacteristic_with(model, p0, horizon, &TraceOptions { tol, ..TraceOptions::default() })
}

/// Integrate the Hamilton field forward from `p0` for flow parameter up to
/// `horizon`, switching fiber charts near fiber infinity.
pub fn trace_bicharacteristic_with(
    model: &MetricModel,
    p0: &CotangentPoint,
    horizon: f64,
    opts: &TraceOptions,
) -> Result<Bicharacteristic> {
    let k = model.k();
    if p0.y.len() != k || p0.eta.len() != k {
        return Err(Error::Precondition(format!("expected {k} angular and {k} eta components")));
    }
    if p0.rho < 0.0 {
        return Err(Error::Precondition("rho must be nonnegative".into()));
    }
    model.check_point(&p0.base())?;
    let lam0 = normalized_symbol(model, &p0.base(), &p0.fiber());
    if opts.null && lam0.abs() > opts.tol {
        return Err(Error::Precondition(format!("initial point is not null: lambda = {lam0:e}")));
    }

    let mut compact = p0.gamma.abs() > COMPACTIFY_ABOVE;
    let mut x = if compact { pack_compact(&p0.compactified()?) } else { pack_finite(p0) };
    let point = |x: &[f64], compact: bool| {
        if compact {
            FlowPoint::Compact(unpack_compact(x, k))
        } else {
            FlowPoint::Finite(unpack_finite(x, k))
        }
    };
    let lambda_of = |p: &FlowPoint| match p {
        FlowPoint::Finite(p) => normalized_symbol(model, &p.base(), &p.fiber()),
        FlowPoint::Compact(q) => normalized_symbol(model, &q.base(), &q.direction()),
    };

    let first = point(&x, compact);
    let mut out = Bicharacteristic {
        params: vec![0.0],
        lambda: vec![lambda_of(&first)],
        points: vec![first],
        termination: Termination::HorizonExhausted,
    };
    if horizon <= 0.0 {
        return Ok(out);
    }

    let mut t = 0.0;
    let mut h = 1e-2_f64.min(horizon);
    let mut inside = 0usize;
    for _ in 0..opts.max_steps {
        let step = h.min(horizon - t);
        let (tn, xn, hn) = if compact {
            opts.ode.step(&mut |_t, y: &[f64], dy: &mut [f64]| compact_field(model, y, dy), t, &x, step)?
        } else {
            opts.ode.step(&mut |_t, y: &[f64], dy: &mut [f64]| finite_field(model, y, dy), t, &x, step)?
        };
        t = tn;
        x = xn;
        h = hn;

        // Chart handoff.
        if !compact && x[3 + k].abs() > COMPACTIFY_ABOVE {
            x = pack_compact(&unpack_finite(&x, k).compactified()?);
            compact = true;
        } else if compact && x[2 + k].abs() > EXPAND_ABOVE {
            x = pack_finite(&unpack_compact(&x, k).expanded()?);
            compact = false;
        }

        let p = point(&x, compact);
        let base = p.base();
        out.params.push(t);
        out.lambda.push(lambda_of(&p));
        let dist = if compact { p.radial_distance() } else { None };
        out.points.push(p);

        if !model.in_chart(&base) {
            out.termination = Termination::LeftChart;
            return Ok(out);
        }
        match dist {
            Some(d) if d < opts.tol => inside += 1,
            _ => inside = 0,
        }
        if inside >= REACHED_STEPS {
            out.termination = Termination::ReachedRadialSet;
            return Ok(out);
        }
        if t >= horizon {
            return Ok(out);
        }
    }
    Err(Error::NoConvergence(format!("step budget of {} exhausted at parameter {t}", opts.max_steps)))
}
