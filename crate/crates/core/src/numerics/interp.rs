/// Weights of the 4-point Lagrange interpolant on nodes `0, 1, 2, 3` at `x`.
pub fn lagrange4_weights(x: f64) -> [f64; 4] {
    let (a, b, c, d) = (x, x - 1.0, x - 2.0, x - 3.0);
    [-b * c * d / 6.0, a * c * d / 2.0, -a * b * d / 2.0, a * b * c / 6.0]
}

/// Interpolate uniformly spaced samples `y[i] = f(x0 + i h)` at `x` with a
/// centred 4-point stencil. Returns `None` if the stencil leaves the data.
pub fn lagrange4(y: &[f64], x0: f64, h: f64, x: f64) -> Option<f64> {
    let s = (x - x0) / h;
    let i = s.floor() as i64 - 1;
    if i < 0 || i + 3 >= y.len() as i64 {
        return None;
    }
    let w = lagrange4_weights(s - i as f64);
    let i = i as usize;
    Some(w[0] * y[i] + w[1] * y[i + 1] + w[2] * y[i + 2] + w[3] * y[i + 3])
}
