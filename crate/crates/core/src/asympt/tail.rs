use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TailOptions {
    /// Search range for `Re p`.
    pub p_min: f64,
    pub p_max: f64,
    /// Largest oscillation frequency `Im p` considered (0 disables the
    /// oscillatory model).
    pub q_max: f64,
    /// Allowed drift of `p` when the window start is doubled.
    pub drift_tol: f64,
}

impl Default for TailOptions {
    fn default() -> Self {
        TailOptions { p_min: -12.0, p_max: 2.0, q_max: 10.0, drift_tol: 0.05 }
    }
}

/// `w0(s) ~ Re(A s^p) (log s)^kappa`.
#[derive(Clone, Debug, Serialize)]
pub struct TailFit {
    pub p: Complex64,
    pub kappa: u32,
    pub amplitude: Complex64,
    /// RMS residual relative to the RMS of the data.
    pub rel_residual: f64,
    /// `|p - p'|` with `p'` fitted after doubling the window start.
    pub drift: f64,
    pub stable: bool,
    pub window: (f64, f64),
    /// `(kappa, p, rel_residual)` of every model tried.
    pub candidates: Vec<(u32, Complex64, f64)>,
}

struct ModelFit {
    p: Complex64,
    amp: Complex64,
    res: f64,
}

/// Best amplitude for fixed exponent; returns `(res^2, A)`.
fn project(s: &[f64], w: &[f64], kappa: u32, pr: f64, q: f64) -> (f64, Complex64) {
    let cols = |x: f64| {
        let l = x.ln();
        let base = x.powf(pr) * l.powi(kappa as i32);
        if q == 0.0 {
            (base, 0.0)
        } else {
            (base * (q * l).cos(), -base * (q * l).sin())
        }
    };
    let (mut aa, mut ab, mut bb, mut ya, mut yb, mut yy) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for (&x, &y) in s.iter().zip(w) {
        let (a, b) = cols(x);
        aa += a * a;
        ab += a * b;
        bb += b * b;
        ya += y * a;
        yb += y * b;
        yy += y * y;
    }
    let amp = if q == 0.0 {
        if aa == 0.0 {
            return (yy, Complex64::new(0.0, 0.0));
        }
        Complex64::new(ya / aa, 0.0)
    } else {
        let det = aa * bb - ab * ab;
        if det.abs() <= 1e-300 * aa.max(bb).powi(2) {
            return (yy, Complex64::new(0.0, 0.0));
        }
        Complex64::new((ya * bb - yb * ab) / det, (yb * aa - ya * ab) / det)
    };
    // Explicit residual: the normal-equation identity cancels catastrophically.
    let r2 = s
        .iter()
        .zip(w)
        .map(|(&x, &y)| {
            let (a, b) = cols(x);
            let e = y - amp.re * a - amp.im * b;
            e * e
        })
        .sum();
    (r2, amp)
}

fn golden<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() < 1e-13 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

fn nelder_mead<F: Fn(f64, f64) -> f64>(f: &F, x0: (f64, f64), step: (f64, f64)) -> (f64, f64) {
    let mut pts = [x0, (x0.0 + step.0, x0.1), (x0.0, x0.1 + step.1)];
    let mut vals = pts.map(|p| f(p.0, p.1));
    for _ in 0..2000 {
        let mut idx = [0, 1, 2];
        idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = idx.map(|i| pts[i]);
        vals = idx.map(|i| vals[i]);
        let size = (pts[1].0 - pts[0].0).abs() + (pts[1].1 - pts[0].1).abs() + (pts[2].0 - pts[0].0).abs() + (pts[2].1 - pts[0].1).abs();
        if size < 1e-13 {
            break;
        }
        let c = ((pts[0].0 + pts[1].0) / 2.0, (pts[0].1 + pts[1].1) / 2.0);
        let lerp = |t: f64| (c.0 + t * (pts[2].0 - c.0), c.1 + t * (pts[2].1 - c.1));
        let r = lerp(-1.0);
        let fr = f(r.0, r.1);
        if fr < vals[0] {
            let e = lerp(-2.0);
            let fe = f(e.0, e.1);
            if fe < fr {
                pts[2] = e;
                vals[2] = fe;
            } else {
                pts[2] = r;
                vals[2] = fr;
            }
        } else if fr < vals[1] {
            pts[2] = r;
            vals[2] = fr;
        } else {
            let k = lerp(0.5);
            let fk = f(k.0, k.1);
            if fk < vals[2] {
                pts[2] = k;
                vals[2] = fk;
            } else {
                for i in 1..3 {
                    pts[i] = ((pts[i].0 + pts[0].0) / 2.0, (pts[i].1 + pts[0].1) / 2.0);
                    vals[i] = f(pts[i].0, pts[i].1);
                }
            }
        }
    }
    pts[0]
}

fn fit_model(s: &[f64], w: &[f64], kappa: u32, oscillatory: bool, opts: &TailOptions) -> ModelFit {
    let norm: f64 = w.iter().map(|x| x * x).sum::<f64>().max(f64::MIN_POSITIVE);
    let rel = |r2: f64| (r2 / norm).sqrt();
    if !oscillatory {
        let f = |p: f64| project(s, w, kappa, p, 0.0).0;
        let n = ((opts.p_max - opts.p_min) / 0.05).ceil() as usize;
        let grid: Vec<f64> = (0..=n).map(|i| opts.p_min + i as f64 * 0.05).collect();
        let best = grid.iter().copied().min_by(|a, b| f(*a).total_cmp(&f(*b))).unwrap_or(0.0);
        let p = golden(&f, best - 0.05, best + 0.05);
        let (r2, amp) = project(s, w, kappa, p, 0.0);
        return ModelFit { p: Complex64::new(p, 0.0), amp, res: rel(r2) };
    }
    let f = |pr: f64, q: f64| project(s, w, kappa, pr, q).0;
    let mut best = (0.0, 0.0, f64::INFINITY);
    let (np, nq) = (((opts.p_max - opts.p_min) / 0.1).ceil() as usize, (opts.q_max / 0.05).ceil() as usize);
    for i in 0..=np {
        let pr = opts.p_min + i as f64 * 0.1;
        for j in 1..=nq {
            let q = j as f64 * 0.05;
            let v = f(pr, q);
            if v < best.2 {
                best = (pr, q, v);
            }
        }
    }
    let (pr, q) = nelder_mead(&f, (best.0, best.1), (0.05, 0.02));
    let (r2, amp) = project(s, w, kappa, pr, q);
    ModelFit { p: Complex64::new(pr, q), amp, res: rel(r2) }
}

fn fit_window(s: &[f64], w: &[f64], opts: &TailOptions) -> (u32, ModelFit, Vec<(u32, Complex64, f64)>) {
    let mut candidates = Vec::new();
    let mut best: Option<(u32, ModelFit)> = None;
    let better = |a: &ModelFit, b: &ModelFit, penalty: f64| a.res < penalty * b.res && b.res > 1e-12;
    let (lo, hi) = s.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    let span = (hi / lo).ln();
    for kappa in 0..=2u32 {
        let real = fit_model(s, w, kappa, false, opts);
        candidates.push((kappa, real.p, real.res));
        let mut choice = real;
        if opts.q_max > 0.0 {
            let osc = fit_model(s, w, kappa, true, opts);
            candidates.push((kappa, osc.p, osc.res));
            // The oscillatory model has one more parameter; require a clear
            // gain and at least half a period across the window, since
            // `sin(q log s)` with tiny `q` just imitates `log s`.
            if osc.p.im.abs() * span >= std::f64::consts::PI && better(&osc, &choice, 0.1) {
                choice = osc;
            }
        }
        best = match best {
            None => Some((kappa, choice)),
            Some((k0, b)) => {
                if better(&choice, &b, 0.5) {
                    Some((kappa, choice))
                } else {
                    Some((k0, b))
                }
            }
        };
    }
    let (k, m) = best.expect("at least one model");
    (k, m, candidates)
}

/// Fit `A s^p (log s)^kappa`, `kappa in {0, 1, 2}` and `p` complex, to
/// samples of `w0` at large `s`, then repeat with the window start doubled.
pub fn fit_tail_decay(s: &[f64], w0: &[f64], opts: &TailOptions) -> Result<TailFit> {
    if s.len() != w0.len() || s.len() < 8 {
        return Err(Error::InsufficientData(format!("{} tail samples", s.len())));
    }
    if s.iter().any(|&x| !(x > 1.0)) {
        return Err(Error::Precondition("tail fit needs s > 1".into()));
    }
    let (kappa, m, candidates) = fit_window(s, w0, opts);
    let lo = s.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = s.iter().copied().fold(0.0f64, f64::max);
    let late: Vec<usize> = (0..s.len()).filter(|&i| s[i] >= 2.0 * lo).collect();
    let drift = if late.len() >= 6 {
        let s2: Vec<f64> = late.iter().map(|&i| s[i]).collect();
        let w2: Vec<f64> = late.iter().map(|&i| w0[i]).collect();
        let m2 = fit_model(&s2, &w2, kappa, m.p.im != 0.0, opts);
        (m2.p - m.p).norm()
    } else {
        f64::INFINITY
    };
    Ok(TailFit {
        p: m.p,
        kappa,
        amplitude: m.amp,
        rel_residual: m.res,
        drift,
        stable: drift <= opts.drift_tol,
        window: (lo, hi),
        candidates,
    })
}
