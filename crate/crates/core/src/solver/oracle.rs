use rayon::prelude::*;

use super::source::SourceSpec;
use crate::numerics::quad::integrate;
use crate::{Error, Result};

/// Absolute tolerance of the inner and outer quadratures, for unit
/// amplitude.
const ORACLE_TOL: f64 = 1e-12;

/// `psi(t, r)` on Minkowski by d'Alembert's formula: half the integral of the
/// oddly extended `r f` over the backward characteristic triangle.
pub fn minkowski_psi(source: &SourceSpec, t: f64, r: f64) -> f64 {
    if source.amplitude == 0.0 {
        return 0.0;
    }
    let (t_lo, t_hi) = source.t_support();
    let (r_lo, r_hi) = source.r_support();
    let t_top = t.min(t_hi);
    if t_top <= t_lo {
        return 0.0;
    }
    let tol = ORACLE_TOL;
    let g = |rr: f64| rr * source.radial_profile(rr);
    let inner = |tp: f64| -> f64 {
        let d = t - tp;
        let (a, b) = (r - d, r + d);
        let mut acc = 0.0;
        // Positive image.
        let (lo, hi) = (a.max(r_lo), b.min(r_hi));
        if hi > lo {
            acc += integrate(&mut |x| g(x), lo, hi, tol).0;
        }
        // Odd image on r < 0.
        let (lo, hi) = (a.max(-r_hi), b.min(-r_lo));
        if hi > lo {
            acc -= integrate(&mut |x| g(-x), lo, hi, tol).0;
        }
        acc * source.time_profile(tp)
    };
    // The inner integral has kinks where the triangle edges cross the support
    // ends; split the outer integral there.
    let mut cuts = vec![t_lo, t_top];
    for e in [r_lo, r_hi, -r_lo, -r_hi] {
        for tp in [t - (e - r), t - (r - e)] {
            if tp > t_lo && tp < t_top {
                cuts.push(tp);
            }
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut f = inner;
    0.5 * source.amplitude * cuts.windows(2).map(|w| integrate(&mut f, w[0], w[1], tol).0).sum::<f64>()
}

/// Exact forward solution `u = psi / r` of the Minkowski wave equation at
/// the points `(t, r)`, `r > 0`, independent of any finite-difference code.
pub fn exact_minkowski_oracle(source: &SourceSpec, points: &[(f64, f64)]) -> Result<Vec<f64>> {
    source.validate()?;
    if let Some(&(_, r)) = points.iter().find(|p| !(p.1 > 0.0)) {
        return Err(Error::Precondition(format!("oracle points need r > 0, got r = {r}")));
    }
    Ok(points.par_iter().map(|&(t, r)| minkowski_psi(source, t, r) / r).collect())
}
