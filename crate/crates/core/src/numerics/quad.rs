//! Gauss-Kronrod quadrature.

/// Kronrod 15-point nodes (nonnegative half) and weights, with the embedded
/// Gauss 7-point weights.
pub const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
pub const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
pub const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// 15 Kronrod nodes and weights on `[a, b]`.
pub fn gk15_rule(a: f64, b: f64) -> ([f64; 15], [f64; 15]) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut x = [0.0; 15];
    let mut w = [0.0; 15];
    for i in 0..7 {
        x[i] = c - h * XGK[i];
        x[14 - i] = c + h * XGK[i];
        w[i] = h * WGK[i];
        w[14 - i] = h * WGK[i];
    }
    x[7] = c;
    w[7] = h * WGK[7];
    (x, w)
}

/// Gauss 7-point weights aligned with the 15 Kronrod nodes (zero on the
/// Kronrod-only nodes).
pub fn g7_weights(a: f64, b: f64) -> [f64; 15] {
    let h = 0.5 * (b - a);
    let mut w = [0.0; 15];
    for (g, i) in [1usize, 3, 5].iter().enumerate() {
        w[*i] = h * WG[g];
        w[14 - *i] = h * WG[g];
    }
    w[7] = h * WG[3];
    w
}

/// One GK15 panel: Kronrod estimate and |Kronrod - Gauss|.
pub fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let (x, wk) = gk15_rule(a, b);
    let wg = g7_weights(a, b);
    let mut k = 0.0;
    let mut g = 0.0;
    for i in 0..15 {
        let fx = f(x[i]);
        k += wk[i] * fx;
        g += wg[i] * fx;
    }
    (k, (k - g).abs())
}

/// Adaptive GK15 integration of `f` over `[a, b]` to absolute tolerance.
/// Returns the value and the accumulated error estimate.
pub fn integrate<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    fn rec<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, tol: f64, whole: (f64, f64), depth: u32) -> (f64, f64) {
        let (v, e) = whole;
        if e <= tol || depth >= 50 || (b - a).abs() < 1e-14 * (1.0 + a.abs()) {
            return (v, e);
        }
        let m = 0.5 * (a + b);
        let l = gk15(f, a, m);
        let r = gk15(f, m, b);
        let (lv, le) = rec(f, a, m, 0.5 * tol, l, depth + 1);
        let (rv, re) = rec(f, m, b, 0.5 * tol, r, depth + 1);
        (lv + rv, le + re)
    }
    let whole = gk15(f, a, b);
    rec(f, a, b, tol, whole, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_smooth_and_peaked_functions() {
        let (v, _) = integrate(&mut |x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-13);
        assert!((v - 2.0).abs() < 1e-13);
        let (v, _) = integrate(&mut |x: f64| (-(x * x) / 2e-4).exp(), -1.0, 1.0, 1e-14);
        assert!((v - (2e-4 * std::f64::consts::PI).sqrt()).abs() < 1e-12);
    }
}
