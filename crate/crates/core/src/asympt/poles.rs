use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;
use std::fmt::Write as _;

use super::mellin::MellinSlice;
use crate::{Error, Result};

/// Barycentric rational approximant from the AAA algorithm.
#[derive(Clone, Debug, Serialize)]
pub struct Aaa {
    pub support: Vec<Complex64>,
    pub values: Vec<Complex64>,
    pub weights: Vec<Complex64>,
    /// Max error on the sample set, relative to `max |F|`.
    pub rel_error: f64,
}

impl Aaa {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut n = Complex64::new(0.0, 0.0);
        let mut d = Complex64::new(0.0, 0.0);
        for ((zj, fj), wj) in self.support.iter().zip(&self.values).zip(&self.weights) {
            let dz = z - zj;
            if dz.norm() == 0.0 {
                return *fj;
            }
            let c = wj / dz;
            n += c * fj;
            d += c;
        }
        n / d
    }

    /// Zeros of the denominator, from the arrowhead pencil
    /// `[[0, w^T], [1, diag(z)]] - lambda diag(0, 1, .., 1)` after a shift
    /// and invert.
    pub fn poles(&self) -> Result<Vec<Complex64>> {
        let m = self.support.len();
        if m < 2 {
            return Ok(Vec::new());
        }
        let scale = self.support.iter().map(|z| z.norm()).fold(1.0f64, f64::max);
        let alpha = self.support.iter().sum::<Complex64>() / m as f64 + Complex64::new(0.1234, 0.5678) * scale;
        let n = m + 1;
        let mut e = DMatrix::<Complex64>::zeros(n, n);
        let mut b = DMatrix::<Complex64>::zeros(n, n);
        for j in 0..m {
            e[(0, j + 1)] = self.weights[j];
            e[(j + 1, 0)] = Complex64::new(1.0, 0.0);
            e[(j + 1, j + 1)] = self.support[j];
            b[(j + 1, j + 1)] = Complex64::new(1.0, 0.0);
        }
        let shifted = &e - &b * alpha;
        let inv = shifted
            .try_inverse()
            .ok_or_else(|| Error::IllConditioned("singular shifted pencil".into()))?;
        let c = inv * b;
        let schur = nalgebra::Schur::try_new(c, f64::EPSILON, 5000)
            .ok_or_else(|| Error::NoConvergence("Schur decomposition of the pole pencil".into()))?;
        let (_, t) = schur.unpack();
        let mus: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();
        let mmax = mus.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
        Ok(mus.into_iter().filter(|mu| mu.norm() > 1e-13 * mmax).map(|mu| alpha + 1.0 / mu).collect())
    }
}

/// AAA rational approximation of samples `f` at points `z`.
pub fn aaa(z: &[Complex64], f: &[Complex64], tol: f64, max_terms: usize) -> Result<Aaa> {
    let mtot = z.len();
    if mtot != f.len() || mtot < 2 {
        return Err(Error::InsufficientData(format!("{} points, {} values", mtot, f.len())));
    }
    let fmax = f.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
    if fmax == 0.0 {
        return Ok(Aaa { support: vec![], values: vec![], weights: vec![], rel_error: 0.0 });
    }
    let mean = f.iter().sum::<Complex64>() / mtot as f64;
    let mut r: Vec<Complex64> = vec![mean; mtot];
    let mut in_support = vec![false; mtot];
    let mut support = Vec::new();
    let mut values = Vec::new();
    let mut best = Aaa { support: vec![], values: vec![], weights: vec![], rel_error: f64::INFINITY };
    for _ in 0..max_terms.min(mtot - 1) {
        let (j, _) = (0..mtot)
            .filter(|&i| !in_support[i])
            .map(|i| (i, (f[i] - r[i]).norm()))
            .fold((usize::MAX, -1.0), |a, b| if b.1 > a.1 { b } else { a });
        in_support[j] = true;
        support.push(z[j]);
        values.push(f[j]);
        let rest: Vec<usize> = (0..mtot).filter(|&i| !in_support[i]).collect();
        let m = support.len();
        let c = DMatrix::from_fn(rest.len(), m, |i, k| 1.0 / (z[rest[i]] - support[k]));
        // Zero rows keep the system at least square so all m right singular
        // vectors are available.
        let rows = rest.len().max(m);
        let a = DMatrix::from_fn(rows, m, |i, k| if i < rest.len() { (f[rest[i]] - values[k]) * c[(i, k)] } else { Complex64::new(0.0, 0.0) });
        let svd = a.svd(false, true);
        let v_t = svd.v_t.ok_or_else(|| Error::NoConvergence("AAA SVD".into()))?;
        let sv = &svd.singular_values;
        let imin = (0..sv.len()).min_by(|&p, &q| sv[p].total_cmp(&sv[q])).unwrap_or(0);
        let weights: Vec<Complex64> = (0..m).map(|k| v_t[(imin, k)].conj()).collect();
        for (i, &ri) in rest.iter().enumerate() {
            let mut n = Complex64::new(0.0, 0.0);
            let mut d = Complex64::new(0.0, 0.0);
            for k in 0..m {
                n += c[(i, k)] * weights[k] * values[k];
                d += c[(i, k)] * weights[k];
            }
            r[ri] = n / d;
        }
        for (i, flag) in in_support.iter().enumerate() {
            if *flag {
                r[i] = f[i];
            }
        }
        let err = (0..mtot).map(|i| (f[i] - r[i]).norm()).fold(0.0f64, f64::max) / fmax;
        if err < best.rel_error {
            best = Aaa { support: support.clone(), values: values.clone(), weights: weights.clone(), rel_error: err };
        }
        if err <= tol {
            break;
        }
    }
    Ok(best)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PoleOptions {
    /// Search depth below the lowest sampled line.
    pub depth: f64,
    /// Candidates closer than this are one pole.
    pub cluster_radius: f64,
    /// Radius of the circle used for Laurent coefficients.
    pub laurent_radius: f64,
    /// Laurent coefficients beyond the order are below this fraction of the
    /// leading one.
    pub order_threshold: f64,
    pub max_order: usize,
    pub aaa_tol: f64,
    pub aaa_terms: usize,
}

impl Default for PoleOptions {
    fn default() -> Self {
        PoleOptions {
            depth: 3.0,
            cluster_radius: 0.1,
            laurent_radius: 0.12,
            order_threshold: 1e-6,
            max_order: 6,
            aaa_tol: 1e-13,
            aaa_terms: 120,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Pole {
    pub location: Complex64,
    pub order: usize,
    /// `log10` of the gap between the leading Laurent coefficient and the
    /// largest one beyond the order, scaled to `[0, 1]` over 12 decades.
    pub confidence: f64,
    /// `|a_{-j}|`, `j = 1 ..= max_order + 1`.
    pub laurent: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PoleReport {
    pub poles: Vec<Pole>,
    pub aaa_error: f64,
    pub aaa_terms: usize,
    /// Set when the rational fit missed the requested tolerance.
    pub ill_conditioned: bool,
}

impl PoleReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("re_sigma,im_sigma,order,confidence\n");
        for p in &self.poles {
            let _ = writeln!(out, "{:.15e},{:.15e},{},{:.4}", p.location.re, p.location.im, p.order, p.confidence);
        }
        out
    }
}

const CIRCLE_NODES: usize = 256;

/// `a_{-j}`, `j = 1 ..= count`, of the Laurent series of `r` about `c`,
/// by the trapezoid rule on a circle of radius `radius`.
fn laurent<F: Fn(Complex64) -> Complex64>(r: &F, c: Complex64, radius: f64, count: usize) -> Vec<Complex64> {
    let mut a = vec![Complex64::new(0.0, 0.0); count];
    for q in 0..CIRCLE_NODES {
        let e = Complex64::from_polar(radius, 2.0 * std::f64::consts::PI * q as f64 / CIRCLE_NODES as f64);
        let v = r(c + e);
        let mut p = e;
        for aj in a.iter_mut() {
            *aj += v * p;
            p *= e;
        }
    }
    a.iter().map(|x| x / CIRCLE_NODES as f64).collect()
}

fn order_of(a: &[f64], threshold: f64) -> usize {
    let amax = a.iter().copied().fold(0.0f64, f64::max);
    a.iter().rposition(|&x| x >= threshold * amax).map_or(0, |j| j + 1)
}

/// Poles of the meromorphic continuation of a Mellin transform below the
/// sampled lines, with orders from local Laurent coefficients.
pub fn locate_poles(slices: &[MellinSlice], opts: &PoleOptions) -> Result<PoleReport> {
    let z: Vec<Complex64> = slices.iter().flat_map(|s| s.sigma.iter().copied()).collect();
    let f: Vec<Complex64> = slices.iter().flat_map(|s| s.values.iter().copied()).collect();
    if z.is_empty() {
        return Err(Error::InsufficientData("no Mellin samples".into()));
    }
    let fmax = f.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
    if fmax == 0.0 {
        return Ok(PoleReport { poles: vec![], aaa_error: 0.0, aaa_terms: 0, ill_conditioned: false });
    }
    let fit = aaa(&z, &f, opts.aaa_tol, opts.aaa_terms)?;
    let im_low = z.iter().map(|s| s.im).fold(f64::INFINITY, f64::min);
    let re_lo = z.iter().map(|s| s.re).fold(f64::INFINITY, f64::min);
    let re_hi = z.iter().map(|s| s.re).fold(f64::NEG_INFINITY, f64::max);
    let mut cand: Vec<Complex64> = fit
        .poles()?
        .into_iter()
        .filter(|p| p.im < im_low && p.im > im_low - opts.depth && p.re > re_lo && p.re < re_hi)
        .collect();
    cand.sort_by(|a, b| a.re.total_cmp(&b.re));

    let mut clusters: Vec<Vec<Complex64>> = Vec::new();
    for p in cand {
        match clusters.iter_mut().find(|c| c.iter().any(|q| (q - p).norm() < opts.cluster_radius)) {
            Some(c) => c.push(p),
            None => clusters.push(vec![p]),
        }
    }
    let centres: Vec<Complex64> = clusters.iter().map(|c| c.iter().sum::<Complex64>() / c.len() as f64).collect();
    let eval = |s: Complex64| fit.eval(s);
    let mut poles = Vec::new();
    for (i, &c0) in centres.iter().enumerate() {
        let nearest = centres
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, c)| (c - c0).norm())
            .fold(f64::INFINITY, f64::min);
        let radius = opts.laurent_radius.min(0.45 * nearest);
        let count = opts.max_order + 1;
        let mut c = c0;
        let mut a = laurent(&eval, c, radius, count);
        let mut mags: Vec<f64> = a.iter().map(|x| x.norm()).collect();
        let mut k = order_of(&mags, opts.order_threshold);
        // Spurious doublets carry negligible residues.
        if k == 0 || mags[k - 1] < 1e-10 * fmax {
            continue;
        }
        for _ in 0..8 {
            let delta = a[k] / (k as f64 * a[k - 1]);
            c += delta;
            a = laurent(&eval, c, radius, count);
            mags = a.iter().map(|x| x.norm()).collect();
            k = order_of(&mags, opts.order_threshold).max(1);
            if delta.norm() < 1e-14 * c.norm().max(1.0) {
                break;
            }
        }
        let lead = mags[k - 1];
        let beyond = mags[k..].iter().copied().fold(0.0f64, f64::max);
        let confidence = if beyond == 0.0 { 1.0 } else { ((lead / beyond).log10() / 12.0).clamp(0.0, 1.0) };
        poles.push(Pole { location: c, order: k, confidence, laurent: mags });
    }
    Ok(PoleReport { poles, aaa_error: fit.rel_error, aaa_terms: fit.support.len(), ill_conditioned: fit.rel_error > 1e3 * opts.aaa_tol })
}
