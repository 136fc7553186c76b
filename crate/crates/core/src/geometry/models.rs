use std::sync::Arc;

use super::{check_dimension, ChartDomain, MetricModel, ModelSpec, Remainder, RemainderFn, Slot, SphereFn};
use crate::jet::Jet;
use crate::{Error, Result};

fn constant(c: f64) -> SphereFn {
    Arc::new(move |_y: &[Jet]| Jet::constant(c))
}

/// Diagonal entry `i` of the inverse round metric in hyperspherical angles
/// `(theta_1, .., theta_{k-1}, phi)`.
pub fn round_sphere_inverse(y: &[Jet], i: usize) -> Jet {
    let mut acc = Jet::constant(1.0);
    for th in y.iter().take(i) {
        acc = acc / th.sin().square();
    }
    acc
}

fn round_h_inv(k: usize) -> Vec<SphereFn> {
    let mut out: Vec<SphereFn> = Vec::with_capacity(k * k);
    for i in 0..k {
        for j in 0..k {
            if i == j {
                out.push(Arc::new(move |y: &[Jet]| round_sphere_inverse(y, i)));
            } else {
                out.push(constant(0.0));
            }
        }
    }
    out
}

fn remainder(slot: Slot, f: RemainderFn) -> Remainder {
    Remainder { slot, orders: slot.default_orders(), f }
}

const SPHERE_CHART: ChartDomain = ChartDomain { rho_max: 1.0, v_max: 0.9, polar_cap: 0.15, spherical_angles: true };

/// Minkowski space in dimension 4.
pub fn make_minkowski() -> MetricModel {
    make_minkowski_dim(4).expect("n = 4 is valid")
}

/// Minkowski space in dimension `n` with `rho = 1/t`, `v = 1 - r^2/t^2`.
pub fn make_minkowski_dim(n: usize) -> Result<MetricModel> {
    check_dimension(n)?;
    let k = n - 2;
    let mut rem = Vec::new();
    for i in 0..k {
        rem.push(remainder(
            Slot::YY(i, i),
            Arc::new(move |_r: Jet, v: Jet, y: &[Jet]| -(round_sphere_inverse(y, i) * v / (1.0 - v))),
        ));
    }
    Ok(MetricModel {
        label: format!("minkowski-{n}"),
        n,
        m: 0.0,
        omega: constant(1.0),
        alpha: constant(2.0),
        beta: constant(4.0),
        mu: (0..k).map(|_| constant(0.0)).collect(),
        upsilon: (0..k).map(|_| constant(0.0)).collect(),
        h_inv: round_h_inv(k),
        remainders: rem,
        chart: SPHERE_CHART,
        spec: ModelSpec::Minkowski { n },
    })
}

/// Exact Kerr dual-metric components in the scattering frame, with
/// `rho = 1/t`, `v = 1 - r^2 rho^2` built on Boyer-Lindquist `(t, r)`.
pub(crate) struct KerrComponents {
    pub rr: Jet,
    pub rv: Jet,
    pub vv: Jet,
    pub r_phi: Jet,
    pub v_phi: Jet,
    pub th_th: Jet,
    pub phi_phi: Jet,
}

pub(crate) fn kerr_components(mass: f64, spin: f64, rho: Jet, v: Jet, theta: Jet) -> KerrComponents {
    let one_v = 1.0 - v;
    let sv = one_v.sqrt();
    let (c, s) = (theta.cos(), theta.sin());
    let a2 = spin * spin;
    let d_sigma = one_v + a2 * rho * rho * c * c;
    let d_delta = one_v - 2.0 * mass * rho * sv + a2 * rho * rho;
    let gtt = (one_v + a2 * rho * rho + 2.0 * mass * a2 * rho.powi(3) * sv * s * s / d_sigma) / d_delta;
    let grr = -(d_delta / d_sigma);
    let frame = 2.0 * mass * spin * sv * rho * rho / (d_sigma * d_delta);
    KerrComponents {
        rr: gtt,
        rv: -2.0 * one_v * gtt,
        vv: 4.0 * one_v * (grr + one_v * gtt),
        r_phi: -frame,
        v_phi: 2.0 * one_v * frame,
        th_th: -(d_sigma.recip()),
        phi_phi: -((1.0 - 2.0 * mass * rho * sv / d_sigma) / (d_delta * s * s)),
    }
}

/// Kerr exterior of mass `mass > 0` and rotation parameter `|spin| < mass`,
/// restricted to the far region `r >~ 10 M` where the chart is valid.
pub fn make_kerr_exterior(mass: f64, spin: f64) -> Result<MetricModel> {
    if !(mass > 0.0) || !mass.is_finite() {
        return Err(Error::InvalidModel(format!("mass must be positive, got {mass}")));
    }
    if !(spin.abs() < mass) {
        return Err(Error::InvalidModel(format!("need |a| < M, got a = {spin}, M = {mass}")));
    }
    let m = 4.0 * mass;
    let kc = move |r: Jet, v: Jet, y: &[Jet]| kerr_components(mass, spin, r, v, y[0]);
    let rem = vec![
        remainder(Slot::RhoRho, Arc::new(move |r, v, y| kc(r, v, y).rr - 1.0)),
        remainder(Slot::RhoV, Arc::new(move |r, v, y| kc(r, v, y).rv + 2.0 - 2.0 * v)),
        remainder(
            Slot::VV,
            Arc::new(move |r, v, y| kc(r, v, y).vv + 4.0 * v - 4.0 * m * r - 4.0 * v * v),
        ),
        remainder(Slot::RhoY(1), Arc::new(move |r, v, y| kc(r, v, y).r_phi)),
        remainder(Slot::VY(1), Arc::new(move |r, v, y| kc(r, v, y).v_phi)),
        remainder(Slot::YY(0, 0), Arc::new(move |r, v, y| kc(r, v, y).th_th + 1.0)),
        remainder(
            Slot::YY(1, 1),
            Arc::new(move |r, v, y| kc(r, v, y).phi_phi + round_sphere_inverse(y, 1)),
        ),
    ];
    let rho_max = (0.1 / mass).min(1.0);
    Ok(MetricModel {
        label: format!("kerr-M{mass}-a{spin}"),
        n: 4,
        m,
        omega: constant(1.0),
        alpha: constant(2.0),
        beta: constant(4.0),
        mu: vec![constant(0.0), constant(0.0)],
        upsilon: vec![constant(0.0), constant(0.0)],
        h_inv: round_h_inv(2),
        remainders: rem,
        chart: ChartDomain { rho_max, ..SPHERE_CHART },
        spec: ModelSpec::Kerr { mass, spin },
    })
}

/// Model with constant boundary data and polynomial remainders.
#[allow(clippy::too_many_arguments)]
pub fn make_normal_form(
    n: usize,
    m: f64,
    omega: f64,
    alpha: f64,
    beta: f64,
    mu: Vec<f64>,
    upsilon: Vec<f64>,
    h_inv: Option<Vec<Vec<f64>>>,
    remainders: Vec<super::PolyRemainder>,
) -> Result<MetricModel> {
    check_dimension(n)?;
    let k = n - 2;
    if mu.len() != k || upsilon.len() != k {
        return Err(Error::InvalidModel(format!("mu and upsilon need {k} entries")));
    }
    let spherical = h_inv.is_none();
    let h: Vec<SphereFn> = match &h_inv {
        None => round_h_inv(k),
        Some(rows) => {
            if rows.len() != k || rows.iter().any(|r| r.len() != k) {
                return Err(Error::InvalidModel(format!("h_inv must be {k} x {k}")));
            }
            for i in 0..k {
                for j in 0..k {
                    if (rows[i][j] - rows[j][i]).abs() > 1e-14 * (1.0 + rows[i][j].abs()) {
                        return Err(Error::InvalidModel("h_inv is not symmetric".into()));
                    }
                }
            }
            rows.iter().flatten().map(|&c| constant(c)).collect()
        }
    };
    let mut rem = Vec::new();
    for t in &remainders {
        let slot = t.slot.to_slot(k)?;
        let (c, a, b) = (t.coef, t.rho_pow as i32, t.v_pow as i32);
        rem.push(remainder(slot, Arc::new(move |r: Jet, v: Jet, _y: &[Jet]| c * r.powi(a) * v.powi(b))));
    }
    Ok(MetricModel {
        label: format!("normal-form-{n}"),
        n,
        m,
        omega: constant(omega),
        alpha: constant(alpha),
        beta: constant(beta),
        mu: mu.iter().map(|&c| constant(c)).collect(),
        upsilon: upsilon.iter().map(|&c| constant(c)).collect(),
        h_inv: h,
        remainders: rem,
        chart: ChartDomain { rho_max: 0.5, v_max: 0.5, polar_cap: 0.15, spherical_angles: spherical },
        spec: ModelSpec::NormalForm {
            n,
            m,
            omega,
            alpha,
            beta,
            mu,
            upsilon,
            h_inv,
            remainders,
        },
    })
}
