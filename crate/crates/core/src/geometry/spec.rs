use serde::{Deserialize, Serialize};

use super::{make_kerr_exterior, make_minkowski_dim, make_normal_form, MetricModel, Slot};
use crate::{Error, Result};

/// Serializable description of a [`MetricModel`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    Minkowski {
        #[serde(default = "four")]
        n: usize,
    },
    Kerr {
        mass: f64,
        #[serde(default)]
        spin: f64,
    },
    NormalForm {
        n: usize,
        m: f64,
        #[serde(default = "one")]
        omega: f64,
        #[serde(default = "two")]
        alpha: f64,
        #[serde(default = "four_f")]
        beta: f64,
        #[serde(default)]
        mu: Vec<f64>,
        #[serde(default)]
        upsilon: Vec<f64>,
        /// Constant inverse sphere metric; the round metric when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        h_inv: Option<Vec<Vec<f64>>>,
        #[serde(default)]
        remainders: Vec<PolyRemainder>,
    },
}

fn four() -> usize {
    4
}
fn one() -> f64 {
    1.0
}
fn two() -> f64 {
    2.0
}
fn four_f() -> f64 {
    4.0
}

/// Remainder term `coef * rho^rho_pow * v^v_pow` in one slot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyRemainder {
    pub slot: SlotSpec,
    pub coef: f64,
    #[serde(default)]
    pub rho_pow: u32,
    #[serde(default)]
    pub v_pow: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum SlotSpec {
    RhoRho,
    RhoV,
    VV,
    RhoY { i: usize },
    VY { i: usize },
    YY { i: usize, j: usize },
}

impl SlotSpec {
    pub fn to_slot(self, k: usize) -> Result<Slot> {
        let check = |i: usize| {
            if i < k {
                Ok(i)
            } else {
                Err(Error::InvalidModel(format!("sphere index {i} out of range for k = {k}")))
            }
        };
        Ok(match self {
            SlotSpec::RhoRho => Slot::RhoRho,
            SlotSpec::RhoV => Slot::RhoV,
            SlotSpec::VV => Slot::VV,
            SlotSpec::RhoY { i } => Slot::RhoY(check(i)?),
            SlotSpec::VY { i } => Slot::VY(check(i)?),
            SlotSpec::YY { i, j } => {
                let (a, b) = (check(i)?.min(check(j)?), i.max(j));
                Slot::YY(a, b)
            }
        })
    }
}

impl ModelSpec {
    pub fn build(&self) -> Result<MetricModel> {
        match self.clone() {
            ModelSpec::Minkowski { n } => make_minkowski_dim(n),
            ModelSpec::Kerr { mass, spin } => make_kerr_exterior(mass, spin),
            ModelSpec::NormalForm { n, m, omega, alpha, beta, mu, upsilon, h_inv, remainders } => {
                let k = n.saturating_sub(2);
                let mu = if mu.is_empty() { vec![0.0; k] } else { mu };
                let upsilon = if upsilon.is_empty() { vec![0.0; k] } else { upsilon };
                make_normal_form(n, m, omega, alpha, beta, mu, upsilon, h_inv, remainders)
            }
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("model spec serializes")
    }

    pub fn from_toml(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }
}
