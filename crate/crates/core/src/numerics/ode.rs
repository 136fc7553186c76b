//! Dormand-Prince 5(4) embedded Runge-Kutta integrator.

use crate::{Error, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

#[derive(Clone, Copy, Debug)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub h_min: f64,
    pub h_max: f64,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Dopri5 { rtol: 1e-10, atol: 1e-12, h_min: 1e-12, h_max: 1.0 }
    }
}

impl Dopri5 {
    fn attempt<F: FnMut(f64, &[f64], &mut [f64])>(&self, f: &mut F, t: f64, y: &[f64], h: f64) -> (Vec<f64>, f64) {
        let n = y.len();
        let mut k = vec![vec![0.0; n]; 7];
        let mut tmp = vec![0.0; n];
        for s in 0..7 {
            for i in 0..n {
                let mut acc = y[i];
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += h * A[s][j] * kj[i];
                }
                tmp[i] = acc;
            }
            let mut out = vec![0.0; n];
            f(t + C[s] * h, &tmp, &mut out);
            k[s] = out;
        }
        let mut y5 = y.to_vec();
        let mut err = 0.0;
        for i in 0..n {
            let mut d5 = 0.0;
            let mut d4 = 0.0;
            for s in 0..7 {
                d5 += B5[s] * k[s][i];
                d4 += B4[s] * k[s][i];
            }
            y5[i] += h * d5;
            let sc = self.atol + self.rtol * y[i].abs().max(y5[i].abs());
            let e = h * (d5 - d4) / sc;
            err += e * e;
        }
        (y5, (err / n as f64).sqrt())
    }

    /// Take one accepted step from `(t, y)` trying step size `h` first.
    /// Returns the new time, state, and a suggested next step size.
    pub fn step<F: FnMut(f64, &[f64], &mut [f64])>(
        &self,
        f: &mut F,
        t: f64,
        y: &[f64],
        mut h: f64,
    ) -> Result<(f64, Vec<f64>, f64)> {
        loop {
            if h < self.h_min {
                return Err(Error::NoConvergence(format!("step size underflow at t = {t}")));
            }
            let (y_new, err) = self.attempt(f, t, y, h);
            let finite = y_new.iter().all(|x| x.is_finite());
            if finite && err <= 1.0 {
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                return Ok((t + h, y_new, (h * fac).min(self.h_max)));
            }
            let fac = if finite { (0.9 * err.powf(-0.2)).clamp(0.1, 0.5) } else { 0.25 };
            h *= fac;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator() {
        let ode = Dopri5::default();
        let mut f = |_t: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = y[1];
            dy[1] = -y[0];
        };
        let (mut t, mut y, mut h): (f64, Vec<f64>, f64) = (0.0, vec![1.0, 0.0], 0.1);
        while t < 10.0 {
            let hh = h.min(10.0 - t);
            let (tn, yn, hn) = ode.step(&mut f, t, &y, hh).unwrap();
            t = tn;
            y = yn;
            h = hn;
        }
        assert!((y[0] - 10f64.cos()).abs() < 1e-8);
        assert!((y[1] + 10f64.sin()).abs() < 1e-8);
    }
}
