use nalgebra::{DMatrix, Schur};
use serde::Serialize;

use super::{rescaled_field, CompactPoint};
use crate::geometry::{sphere_center, MetricModel};
use crate::{Error, Result};

const H0: f64 = 1e-3;
const SWEEP: f64 = 4.0;
const SWEEP_TOL: f64 = 1e-6;
const CLUSTER_TOL: f64 = 1e-3;
const RANK_TOL: f64 = 1e-6;

/// Eigenvalues that agree to `CLUSTER_TOL`, with multiplicities and a basis
/// of left eigenvectors (covectors) when the value is real.
#[derive(Clone, Debug, Serialize)]
pub struct EigenCluster {
    pub re: f64,
    pub im: f64,
    pub algebraic: usize,
    pub geometric: usize,
    pub covectors: Vec<Vec<f64>>,
}

/// Residual of a prescribed covector identity `c A = lambda c + rhs`.
#[derive(Clone, Debug, Serialize)]
pub struct CovectorCheck {
    pub name: String,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LinearizationReport {
    pub label: String,
    /// Coordinate order of rows and columns.
    pub coordinates: Vec<String>,
    pub y: Vec<f64>,
    /// Row `i` holds the differential of the `i`-th field component.
    pub matrix: Vec<Vec<f64>>,
    pub clusters: Vec<EigenCluster>,
    pub jordan_block: bool,
    pub checks: Vec<CovectorCheck>,
    /// Half the `rho`-derivative of the angular components.
    pub angular_coefficient: Vec<f64>,
    /// Largest eigenvalue change between the two finite-difference steps.
    pub step_spread: f64,
}

impl LinearizationReport {
    pub fn cluster_near(&self, value: f64) -> Option<&EigenCluster> {
        self.clusters.iter().find(|c| (c.re - value).abs() < CLUSTER_TOL && c.im.abs() < CLUSTER_TOL)
    }

    pub fn check(&self, name: &str) -> Option<f64> {
        self.checks.iter().find(|c| c.name == name).map(|c| c.residual)
    }
}

/// Coordinate order: `rho, v, nu, xi_hat, eta_hat.., y..`.
fn field_at(model: &MetricModel, x: &[f64]) -> Vec<f64> {
    let k = model.k();
    let q = CompactPoint {
        rho: x[0],
        v: x[1],
        nu: x[2],
        xi_hat: x[3],
        eta_hat: x[4..4 + k].to_vec(),
        y: x[4 + k..4 + 2 * k].to_vec(),
    };
    let mut f = vec![0.0; 4 + 2 * k];
    rescaled_field(model, &q, &mut f);
    // Field order is rho, v, y, nu, xi_hat, eta_hat.
    let mut out = vec![f[0], f[1], f[2 + k], f[3 + k]];
    out.extend_from_slice(&f[4 + k..4 + 2 * k]);
    out.extend_from_slice(&f[2..2 + k]);
    out
}

fn central_jacobian(model: &MetricModel, x0: &[f64], h: f64) -> DMatrix<f64> {
    let d = x0.len();
    let mut a = DMatrix::zeros(d, d);
    for j in 0..d {
        let mut xp = x0.to_vec();
        let mut xm = x0.to_vec();
        xp[j] += h;
        xm[j] -= h;
        let (fp, fm) = (field_at(model, &xp), field_at(model, &xm));
        for i in 0..d {
            a[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    a
}

fn richardson_jacobian(model: &MetricModel, x0: &[f64], h: f64) -> DMatrix<f64> {
    let coarse = central_jacobian(model, x0, h);
    let fine = central_jacobian(model, x0, h / 2.0);
    (fine * 4.0 - coarse) / 3.0
}

fn eigenvalues(a: &DMatrix<f64>) -> Result<Vec<(f64, f64)>> {
    let d = a.nrows();
    // Exactly structured matrices can stall the shifted QR iteration; an
    // orthogonal similarity leaves the spectrum unchanged and breaks the tie.
    let mut m = a.clone();
    for attempt in 0..4 {
        if let Some(schur) = Schur::try_new(m.clone(), f64::EPSILON, 2000) {
            let mut ev: Vec<(f64, f64)> = schur.complex_eigenvalues().iter().map(|z| (z.re, z.im)).collect();
            ev.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
            return Ok(ev);
        }
        let angle = 0.3 + 0.2 * attempt as f64;
        let (c, s) = (angle.cos(), angle.sin());
        let mut q = DMatrix::<f64>::identity(d, d);
        let (i, j) = (attempt % d, (attempt + 1 + d / 2) % d);
        q[(i, i)] = c;
        q[(j, j)] = c;
        q[(i, j)] = -s;
        q[(j, i)] = s;
        m = q.transpose() * m * q;
    }
    Err(Error::NoConvergence("eigenvalue iteration did not converge".into()))
}

fn cluster(ev: &[(f64, f64)]) -> Vec<(f64, f64, usize)> {
    let mut groups: Vec<Vec<(f64, f64)>> = Vec::new();
    for &z in ev {
        match groups.iter_mut().find(|g| g.iter().any(|w| (w.0 - z.0).hypot(w.1 - z.1) < CLUSTER_TOL)) {
            Some(g) => g.push(z),
            None => groups.push(vec![z]),
        }
    }
    groups
        .into_iter()
        .map(|g| {
            let n = g.len() as f64;
            (g.iter().map(|z| z.0).sum::<f64>() / n, g.iter().map(|z| z.1).sum::<f64>() / n, g.len())
        })
        .collect()
}

/// Right singular vectors of `m` with singular value below `tol`.
fn null_space(m: &DMatrix<f64>, tol: f64) -> Vec<Vec<f64>> {
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= tol)
        .map(|(i, _)| vt.row(i).iter().copied().collect())
        .collect()
}

fn covector_residual(a: &DMatrix<f64>, c: &[f64], lambda: f64, rhs: &[f64]) -> f64 {
    let d = c.len();
    (0..d)
        .map(|j| {
            let ca: f64 = (0..d).map(|i| c[i] * a[(i, j)]).sum();
            (ca - lambda * c[j] - rhs[j]).powi(2)
        })
        .sum::<f64>()
        .sqrt()
}

/// Linearisation of `nu H` at the radial set over the sphere point `y`
/// (the chart centre), with eigen and Jordan data.
pub fn linearization(model: &MetricModel) -> Result<LinearizationReport> {
    linearization_at(model, &sphere_center(model))
}

pub fn linearization_at(model: &MetricModel, y: &[f64]) -> Result<LinearizationReport> {
    let k = model.k();
    if y.len() != k {
        return Err(Error::Precondition(format!("expected {k} sphere coordinates")));
    }
    let d = 4 + 2 * k;
    let mut x0 = vec![0.0; d];
    x0[4 + k..].copy_from_slice(y);

    let a = richardson_jacobian(model, &x0, H0);
    let a_fine = richardson_jacobian(model, &x0, H0 / SWEEP);
    let scale = a.norm().max(1.0);
    if !a.iter().all(|v| v.is_finite()) {
        return Err(Error::NoConvergence("non-finite field derivative".into()));
    }
    let drift = (&a - &a_fine).norm() / scale;
    let (ev, ev_fine) = (eigenvalues(&a)?, eigenvalues(&a_fine)?);
    let step_spread = ev
        .iter()
        .zip(&ev_fine)
        .map(|(p, q)| (p.0 - q.0).hypot(p.1 - q.1) / p.0.hypot(p.1).max(1.0))
        .fold(0.0, f64::max);
    if drift > SWEEP_TOL || step_spread > SWEEP_TOL {
        return Err(Error::NoConvergence(format!(
            "linearisation changes by {drift:e} (eigenvalues by {step_spread:e}) across the step sweep"
        )));
    }

    let tol = RANK_TOL * scale;
    let eye = DMatrix::<f64>::identity(d, d);
    let clusters: Vec<EigenCluster> = cluster(&ev)
        .into_iter()
        .map(|(re, im, alg)| {
            let real = im.abs() < CLUSTER_TOL;
            let (geometric, covectors) = if real {
                let shifted = &a - &eye * re;
                let left = null_space(&shifted.transpose(), tol);
                (left.len(), left)
            } else {
                (alg, Vec::new())
            };
            EigenCluster { re, im, algebraic: alg, geometric, covectors }
        })
        .collect();
    let jordan_block = clusters.iter().any(|c| c.geometric < c.algebraic);

    let m = model.m;
    let unit = |i: usize| {
        let mut e = vec![0.0; d];
        e[i] = 1.0;
        e
    };
    let zero = vec![0.0; d];
    let mut c8 = vec![0.0; d];
    c8[1] = 1.0;
    c8[3] = 1.0;
    c8[0] = -m;
    let mut chain_rhs = vec![0.0; d];
    chain_rhs[0] = -4.0 * m;
    let mut checks = vec![
        CovectorCheck { name: "dv + dxi_hat - m drho".into(), residual: covector_residual(&a, &c8, -8.0, &zero) },
        CovectorCheck { name: "drho".into(), residual: covector_residual(&a, &unit(0), -4.0, &zero) },
        CovectorCheck { name: "dnu".into(), residual: covector_residual(&a, &unit(2), -4.0, &zero) },
        CovectorCheck {
            name: "dxi_hat chain".into(),
            residual: covector_residual(&a, &unit(3), -4.0, &chain_rhs),
        },
    ];
    for j in 0..k {
        checks.push(CovectorCheck {
            name: format!("deta_hat{j}"),
            residual: covector_residual(&a, &unit(4 + j), -4.0, &zero),
        });
    }

    let mut coordinates: Vec<String> = ["rho", "v", "nu", "xi_hat"].iter().map(|s| s.to_string()).collect();
    coordinates.extend((0..k).map(|j| format!("eta_hat{j}")));
    coordinates.extend((0..k).map(|j| format!("y{j}")));

    Ok(LinearizationReport {
        label: model.label.clone(),
        coordinates,
        y: y.to_vec(),
        matrix: (0..d).map(|i| a.row(i).iter().copied().collect()).collect(),
        clusters,
        jordan_block,
        checks,
        angular_coefficient: (0..k).map(|j| a[(4 + k + j, 0)] / 2.0).collect(),
        step_spread,
    })
}
