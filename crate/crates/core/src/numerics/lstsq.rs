use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// Solution of a column-scaled least-squares problem.
#[derive(Clone, Debug)]
pub struct LstsqSolution {
    pub coef: Vec<f64>,
    /// Condition number of the column-scaled design matrix.
    pub cond: f64,
    /// Root-mean-square residual.
    pub rms_residual: f64,
    /// Residual vector `A x - b`.
    pub residual: Vec<f64>,
}

/// Minimise `|W (A x - b)|` with diagonal weights `w`, via SVD after scaling
/// columns to unit norm.
pub fn weighted_lstsq(a: &DMatrix<f64>, b: &[f64], w: Option<&[f64]>) -> Result<LstsqSolution> {
    let (m, n) = a.shape();
    if m < n || b.len() != m {
        return Err(Error::InsufficientData(format!("{m} equations for {n} unknowns")));
    }
    let wv: Vec<f64> = match w {
        Some(w) => w.to_vec(),
        None => vec![1.0; m],
    };
    let mut aw = a.clone();
    for i in 0..m {
        for j in 0..n {
            aw[(i, j)] *= wv[i];
        }
    }
    let mut scale = vec![1.0; n];
    for j in 0..n {
        let nrm = aw.column(j).norm();
        if nrm == 0.0 {
            return Err(Error::IllConditioned(format!("column {j} is identically zero")));
        }
        scale[j] = nrm;
        aw.column_mut(j).scale_mut(1.0 / nrm);
    }
    let bw = DVector::from_iterator(m, b.iter().zip(&wv).map(|(x, w)| x * w));
    let svd = aw.svd(true, true);
    let sv = &svd.singular_values;
    let (smax, smin) = (sv.max(), sv.min());
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    let x = svd
        .solve(&bw, smax * 1e-15)
        .map_err(|e| Error::IllConditioned(e.to_string()))?;
    let coef: Vec<f64> = (0..n).map(|j| x[j] / scale[j]).collect();
    let xv = DVector::from_vec(coef.clone());
    let r = a * xv - DVector::from_vec(b.to_vec());
    let rms = (r.norm_squared() / m as f64).sqrt();
    Ok(LstsqSolution { coef, cond, rms_residual: rms, residual: r.iter().copied().collect() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_polynomial() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64 * 0.1).collect();
        let a = DMatrix::from_fn(20, 3, |i, j| xs[i].powi(j as i32));
        let b: Vec<f64> = xs.iter().map(|x| 1.0 - 3.0 * x + 0.25 * x * x).collect();
        let s = weighted_lstsq(&a, &b, None).unwrap();
        assert!((s.coef[0] - 1.0).abs() < 1e-12);
        assert!((s.coef[1] + 3.0).abs() < 1e-12);
        assert!((s.coef[2] - 0.25).abs() < 1e-12);
        assert!(s.rms_residual < 1e-12);
    }
}
