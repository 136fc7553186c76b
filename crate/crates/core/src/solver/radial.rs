use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Inner boundary for positive mass, in units of `M`.
pub const INNER_RADIUS_OVER_M: f64 = 3.0;

/// Spherically symmetric reduction of the wave operator on Schwarzschild of
/// mass `mass` (Minkowski when `mass = 0`): `psi = r u` solves
/// `psi_tt - psi_{r* r*} + V psi = (1 - 2M/r) r f`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialModel {
    pub mass: f64,
}

pub fn reduce_radial(mass: f64) -> Result<RadialModel> {
    if !(mass >= 0.0) || !mass.is_finite() {
        return Err(Error::InvalidModel(format!("mass must be nonnegative, got {mass}")));
    }
    Ok(RadialModel { mass })
}

impl RadialModel {
    pub fn is_minkowski(&self) -> bool {
        self.mass == 0.0
    }

    /// Long-range constant `m = 4M` of the normal form.
    pub fn m(&self) -> f64 {
        4.0 * self.mass
    }

    pub fn label(&self) -> String {
        if self.is_minkowski() {
            "minkowski".into()
        } else {
            format!("schwarzschild-M{}", self.mass)
        }
    }

    /// `V(r) = (1 - 2M/r) 2M / r^3`.
    pub fn potential(&self, r: f64) -> f64 {
        let m = self.mass;
        (1.0 - 2.0 * m / r) * 2.0 * m / (r * r * r)
    }

    /// Factor multiplying `r f` on the right-hand side.
    pub fn lapse(&self, r: f64) -> f64 {
        1.0 - 2.0 * self.mass / r
    }

    pub fn r_inner(&self) -> f64 {
        INNER_RADIUS_OVER_M * self.mass
    }

    pub fn r_star_inner(&self) -> f64 {
        self.tortoise(self.r_inner()).expect("inner radius lies outside the horizon")
    }

    fn check_r(&self, r: f64) -> Result<()> {
        if self.is_minkowski() {
            if r < 0.0 {
                return Err(Error::OutsideChart(format!("r = {r} < 0")));
            }
        } else if !(r > 2.0 * self.mass * 1.01) {
            return Err(Error::OutsideChart(format!("r = {r} too close to the horizon r = {}", 2.0 * self.mass)));
        }
        Ok(())
    }

    /// `r* = r + 2M log(r/2M - 1)`.
    pub fn tortoise(&self, r: f64) -> Result<f64> {
        self.check_r(r)?;
        if self.is_minkowski() {
            return Ok(r);
        }
        let m2 = 2.0 * self.mass;
        Ok(r + m2 * (r / m2 - 1.0).ln())
    }

    /// Inverse tortoise map by Newton iteration in `y = log(r/2M - 1)`, where
    /// the map is increasing and convex.
    pub fn r_of_tortoise(&self, r_star: f64) -> Result<f64> {
        if self.is_minkowski() {
            self.check_r(r_star)?;
            return Ok(r_star);
        }
        let m2 = 2.0 * self.mass;
        let g = |y: f64| m2 * (1.0 + y.exp()) + m2 * y - r_star;
        let mut y = if r_star > m2 { (r_star / m2 - 1.0).max(1e-300).ln() } else { (r_star - m2) / m2 };
        for _ in 0..200 {
            let step = g(y) / (m2 * (y.exp() + 1.0));
            y -= step;
            if step.abs() <= 1e-15 * y.abs().max(1.0) {
                break;
            }
        }
        let r = m2 * (1.0 + y.exp());
        self.check_r(r)?;
        if (self.tortoise(r)? - r_star).abs() > 1e-10 * r_star.abs().max(1.0) {
            return Err(Error::NoConvergence(format!("tortoise inversion failed at r* = {r_star}")));
        }
        Ok(r)
    }
}
