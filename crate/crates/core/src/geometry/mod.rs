//! Dual metrics near the corner of null infinity and spacelike infinity.
//!
//! Coordinates are `(rho, v, y)` with `rho` a boundary defining function of
//! future timelike infinity, `v` vanishing at null infinity and `y` coordinates
//! on the sphere `S^{n-2}`. Components are given in the scattering frame
//! `d rho / rho^2, dv / rho, dy / rho`, in which the dual metric reads
//!
//! ```text
//! G^{rr} = omega                          + R
//! G^{rv} = -2 + alpha v                   + R
//! G^{vv} = -4v + 4 m rho + beta v^2       + R
//! G^{ry} = -mu / 2                        + R
//! G^{vy} = -v Upsilon                     + R
//! G^{yy} = -h^{-1}                        + R
//! ```
//!
//! with `omega, alpha, beta, mu, Upsilon, h` functions of `y` alone and the
//! remainders `R` vanishing to the orders recorded in [`Remainder`].

mod models;
mod spec;
mod validate;

pub use models::{make_kerr_exterior, make_minkowski, make_minkowski_dim, make_normal_form, round_sphere_inverse};
pub use spec::{ModelSpec, PolyRemainder, SlotSpec};
pub use validate::{measure_constants, sphere_center, validate_model, BoundaryConstants, InvariantCheck, ValidationReport};

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::jet::{Jet, MAX_VARS};
use crate::{Error, Result};

/// Coefficient depending on the sphere coordinates only.
pub type SphereFn = Arc<dyn Fn(&[Jet]) -> Jet + Send + Sync>;
/// Remainder term depending on `(rho, v, y)`.
pub type RemainderFn = Arc<dyn Fn(Jet, Jet, &[Jet]) -> Jet + Send + Sync>;

/// Component of the dual metric in the scattering frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Slot {
    RhoRho,
    RhoV,
    VV,
    RhoY(usize),
    VY(usize),
    /// Symmetric; `YY(i, j)` with `i <= j` contributes to both entries.
    YY(usize, usize),
}

impl Slot {
    /// Monomials `rho^a v^b` whose span bounds a remainder in this slot.
    pub fn default_orders(self) -> Vec<(u32, u32)> {
        match self {
            Slot::RhoRho | Slot::RhoV => vec![(1, 0)],
            Slot::VV => vec![(1, 1), (2, 0)],
            Slot::RhoY(_) | Slot::YY(..) => vec![(0, 1), (1, 0)],
            Slot::VY(_) => vec![(0, 2), (1, 0)],
        }
    }

    pub fn name(self) -> String {
        match self {
            Slot::RhoRho => "rho-rho".into(),
            Slot::RhoV => "rho-v".into(),
            Slot::VV => "v-v".into(),
            Slot::RhoY(i) => format!("rho-y{i}"),
            Slot::VY(i) => format!("v-y{i}"),
            Slot::YY(i, j) => format!("y{i}-y{j}"),
        }
    }
}

/// Remainder term with its declared vanishing order.
#[derive(Clone)]
pub struct Remainder {
    pub slot: Slot,
    /// `|R| <= C * sum |rho^a v^b|` over these monomials.
    pub orders: Vec<(u32, u32)>,
    pub f: RemainderFn,
}

/// Region where a model's chart is valid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChartDomain {
    pub rho_max: f64,
    pub v_max: f64,
    /// Excluded neighbourhood of the coordinate poles for polar angles.
    pub polar_cap: f64,
    /// Whether `y` are hyperspherical angles `(theta_1, .., theta_{k-1}, phi)`.
    pub spherical_angles: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BasePoint {
    pub rho: f64,
    pub v: f64,
    pub y: Vec<f64>,
}

impl BasePoint {
    pub fn new(rho: f64, v: f64, y: Vec<f64>) -> Self {
        BasePoint { rho, v, y }
    }
}

/// Spacetime metric of dimension `n` in normal form near the corner.
#[derive(Clone)]
pub struct MetricModel {
    pub label: String,
    pub n: usize,
    /// Mass parameter `m` in `G^{vv}`.
    pub m: f64,
    pub omega: SphereFn,
    pub alpha: SphereFn,
    pub beta: SphereFn,
    pub mu: Vec<SphereFn>,
    pub upsilon: Vec<SphereFn>,
    /// Row-major `(n-2) x (n-2)` inverse sphere metric.
    pub h_inv: Vec<SphereFn>,
    pub remainders: Vec<Remainder>,
    pub chart: ChartDomain,
    pub spec: ModelSpec,
}

impl fmt::Debug for MetricModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricModel")
            .field("label", &self.label)
            .field("n", &self.n)
            .field("m", &self.m)
            .field("remainders", &self.remainders.len())
            .field("chart", &self.chart)
            .finish()
    }
}

/// Dual metric components at one base point, as jets in `(rho, v, y)`.
#[derive(Clone, Debug)]
pub struct DualJet {
    pub rr: Jet,
    pub rv: Jet,
    pub vv: Jet,
    pub ry: Vec<Jet>,
    pub vy: Vec<Jet>,
    /// Row-major `k x k`.
    pub yy: Vec<Jet>,
}

/// Metric symbol and its first derivatives at a cotangent point.
#[derive(Clone, Debug)]
pub struct SymbolDerivatives {
    pub lambda: f64,
    pub d_xi: f64,
    pub d_gamma: f64,
    pub d_eta: Vec<f64>,
    pub d_rho: f64,
    pub d_v: f64,
    pub d_y: Vec<f64>,
}

impl MetricModel {
    /// Number of sphere coordinates.
    pub fn k(&self) -> usize {
        self.n - 2
    }

    pub fn check_point(&self, p: &BasePoint) -> Result<()> {
        let c = &self.chart;
        if p.y.len() != self.k() {
            return Err(Error::Precondition(format!(
                "expected {} sphere coordinates, got {}",
                self.k(),
                p.y.len()
            )));
        }
        if !(p.rho >= 0.0 && p.rho <= c.rho_max) {
            return Err(Error::OutsideChart(format!("rho = {} not in [0, {}]", p.rho, c.rho_max)));
        }
        if !(p.v.abs() <= c.v_max) {
            return Err(Error::OutsideChart(format!("|v| = {} exceeds {}", p.v.abs(), c.v_max)));
        }
        if c.spherical_angles {
            for &th in p.y.iter().take(self.k().saturating_sub(1)) {
                if !(th >= c.polar_cap && th <= std::f64::consts::PI - c.polar_cap) {
                    return Err(Error::OutsideChart(format!("polar angle {th} inside coordinate cap")));
                }
            }
        }
        Ok(())
    }

    /// Whether a point lies in the chart (without raising).
    pub fn in_chart(&self, p: &BasePoint) -> bool {
        self.check_point(p).is_ok()
    }

    /// Dual metric components as jets, without chart checks.
    pub fn dual_jet(&self, p: &BasePoint) -> DualJet {
        let k = self.k();
        let rho = Jet::var(p.rho, 0);
        let v = Jet::var(p.v, 1);
        let y: Vec<Jet> = p.y.iter().enumerate().map(|(i, &yi)| Jet::var(yi, 2 + i)).collect();
        let mut d = DualJet {
            rr: (self.omega)(&y),
            rv: -2.0 + (self.alpha)(&y) * v,
            vv: -4.0 * v + 4.0 * self.m * rho + (self.beta)(&y) * v * v,
            ry: self.mu.iter().map(|f| -0.5 * f(&y)).collect(),
            vy: self.upsilon.iter().map(|f| -(v * f(&y))).collect(),
            yy: self.h_inv.iter().map(|f| -f(&y)).collect(),
        };
        for r in &self.remainders {
            let val = (r.f)(rho, v, &y);
            match r.slot {
                Slot::RhoRho => d.rr = d.rr + val,
                Slot::RhoV => d.rv = d.rv + val,
                Slot::VV => d.vv = d.vv + val,
                Slot::RhoY(i) => d.ry[i] = d.ry[i] + val,
                Slot::VY(i) => d.vy[i] = d.vy[i] + val,
                Slot::YY(i, j) => {
                    d.yy[i * k + j] = d.yy[i * k + j] + val;
                    if i != j {
                        d.yy[j * k + i] = d.yy[j * k + i] + val;
                    }
                }
            }
        }
        d
    }

    /// Sum of the remainders in `slot` at a point (value only).
    pub fn remainder_value(&self, slot: Slot, p: &BasePoint) -> f64 {
        let rho = Jet::constant(p.rho);
        let v = Jet::constant(p.v);
        let y: Vec<Jet> = p.y.iter().map(|&t| Jet::constant(t)).collect();
        self.remainders.iter().filter(|r| r.slot == slot).map(|r| (r.f)(rho, v, &y).val).sum()
    }

    /// Symbol `lambda` at fiber `(xi, gamma, eta)` with its derivatives.
    ///
    /// `d_rho` is the plain partial derivative; the Hamilton field uses
    /// `rho * d_rho`.
    pub fn symbol_derivatives(&self, p: &BasePoint, fiber: &[f64]) -> SymbolDerivatives {
        let k = self.k();
        let d = self.dual_jet(p);
        let (xi, ga, eta) = (fiber[0], fiber[1], &fiber[2..]);
        let mut lam = d.rr * (xi * xi) + d.rv * (2.0 * xi * ga) + d.vv * (ga * ga);
        for i in 0..k {
            lam = lam + d.ry[i] * (2.0 * xi * eta[i]) + d.vy[i] * (2.0 * ga * eta[i]);
            for j in 0..k {
                lam = lam + d.yy[i * k + j] * (eta[i] * eta[j]);
            }
        }
        let mut d_xi = 2.0 * (d.rr.val * xi + d.rv.val * ga);
        let mut d_gamma = 2.0 * (d.rv.val * xi + d.vv.val * ga);
        let mut d_eta = vec![0.0; k];
        for i in 0..k {
            d_xi += 2.0 * d.ry[i].val * eta[i];
            d_gamma += 2.0 * d.vy[i].val * eta[i];
            let mut s = d.ry[i].val * xi + d.vy[i].val * ga;
            for j in 0..k {
                s += d.yy[i * k + j].val * eta[j];
            }
            d_eta[i] = 2.0 * s;
        }
        SymbolDerivatives {
            lambda: lam.val,
            d_xi,
            d_gamma,
            d_eta,
            d_rho: lam.d(0),
            d_v: lam.d(1),
            d_y: (0..k).map(|i| lam.d(2 + i)).collect(),
        }
    }
}

fn assemble(d: &DualJet, n: usize) -> DMatrix<f64> {
    let k = n - 2;
    let mut g = DMatrix::zeros(n, n);
    g[(0, 0)] = d.rr.val;
    g[(0, 1)] = d.rv.val;
    g[(1, 0)] = d.rv.val;
    g[(1, 1)] = d.vv.val;
    for i in 0..k {
        g[(0, 2 + i)] = d.ry[i].val;
        g[(2 + i, 0)] = d.ry[i].val;
        g[(1, 2 + i)] = d.vy[i].val;
        g[(2 + i, 1)] = d.vy[i].val;
        for j in 0..k {
            g[(2 + i, 2 + j)] = d.yy[i * k + j].val;
        }
    }
    g
}

/// Dual metric in the scattering frame `(d rho/rho^2, dv/rho, dy/rho)`.
pub fn dual_metric_matrix(model: &MetricModel, p: &BasePoint) -> Result<DMatrix<f64>> {
    model.check_point(p)?;
    Ok(assemble(&model.dual_jet(p), model.n))
}

/// Dual metric in the coordinate frame `(d rho, dv, dy)`; requires `rho > 0`
/// for the result to be nondegenerate.
pub fn coordinate_dual_metric(model: &MetricModel, p: &BasePoint) -> Result<DMatrix<f64>> {
    let mut g = dual_metric_matrix(model, p)?;
    let n = model.n;
    let r = p.rho;
    let scale = |i: usize| if i == 0 { r * r } else { r };
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] *= scale(i) * scale(j);
        }
    }
    Ok(g)
}

/// Principal symbol at `(xi, gamma, eta)`, identical for the b- and
/// scattering normalisations of the fiber variables.
pub fn b_symbol(model: &MetricModel, p: &BasePoint, fiber: &[f64]) -> Result<f64> {
    model.check_point(p)?;
    if fiber.len() != model.n {
        return Err(Error::Precondition(format!("fiber has {} entries, expected {}", fiber.len(), model.n)));
    }
    Ok(model.symbol_derivatives(p, fiber).lambda)
}

pub(crate) fn check_dimension(n: usize) -> Result<()> {
    if n < 3 || n > MAX_VARS {
        return Err(Error::InvalidModel(format!("dimension n = {n} must lie in 3..={MAX_VARS}")));
    }
    Ok(())
}
