//! First-order forward-mode jets.
//!
//! A [`Jet`] carries a value and its gradient with respect to at most
//! [`MAX_VARS`] independent variables. Metric coefficients are written once as
//! closures over jets, which gives exact first derivatives for the Hamilton
//! vector field without finite differencing.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Maximum number of independent variables a jet can track.
pub const MAX_VARS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub val: f64,
    pub grad: [f64; MAX_VARS],
}

impl Jet {
    pub const fn constant(val: f64) -> Self {
        Jet { val, grad: [0.0; MAX_VARS] }
    }

    /// Independent variable number `index` with value `val`.
    pub fn var(val: f64, index: usize) -> Self {
        let mut grad = [0.0; MAX_VARS];
        grad[index] = 1.0;
        Jet { val, grad }
    }

    pub fn d(&self, index: usize) -> f64 {
        self.grad[index]
    }

    fn chain(self, val: f64, dval: f64) -> Self {
        let mut grad = self.grad;
        for g in grad.iter_mut() {
            *g *= dval;
        }
        Jet { val, grad }
    }

    pub fn sqrt(self) -> Self {
        let s = self.val.sqrt();
        self.chain(s, 0.5 / s)
    }

    pub fn sin(self) -> Self {
        self.chain(self.val.sin(), self.val.cos())
    }

    pub fn cos(self) -> Self {
        self.chain(self.val.cos(), -self.val.sin())
    }

    pub fn exp(self) -> Self {
        let e = self.val.exp();
        self.chain(e, e)
    }

    pub fn ln(self) -> Self {
        self.chain(self.val.ln(), 1.0 / self.val)
    }

    pub fn recip(self) -> Self {
        let r = 1.0 / self.val;
        self.chain(r, -r * r)
    }

    pub fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Jet::constant(1.0);
        }
        self.chain(self.val.powi(n), n as f64 * self.val.powi(n - 1))
    }

    pub fn square(self) -> Self {
        self * self
    }
}

impl From<f64> for Jet {
    fn from(v: f64) -> Self {
        Jet::constant(v)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        let mut grad = self.grad;
        for (g, h) in grad.iter_mut().zip(o.grad.iter()) {
            *g += h;
        }
        Jet { val: self.val + o.val, grad }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        let mut grad = self.grad;
        for (g, h) in grad.iter_mut().zip(o.grad.iter()) {
            *g -= h;
        }
        Jet { val: self.val - o.val, grad }
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let mut grad = [0.0; MAX_VARS];
        for i in 0..MAX_VARS {
            grad[i] = self.grad[i] * o.val + self.val * o.grad[i];
        }
        Jet { val: self.val * o.val, grad }
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        let inv = 1.0 / o.val;
        let q = self.val * inv;
        let mut grad = [0.0; MAX_VARS];
        for i in 0..MAX_VARS {
            grad[i] = (self.grad[i] - q * o.grad[i]) * inv;
        }
        Jet { val: q, grad }
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.chain(-self.val, -1.0)
    }
}

macro_rules! scalar_ops {
    ($($tr:ident $f:ident),*) => {$(
        impl $tr<f64> for Jet {
            type Output = Jet;
            fn $f(self, o: f64) -> Jet { self.$f(Jet::constant(o)) }
        }
        impl $tr<Jet> for f64 {
            type Output = Jet;
            fn $f(self, o: Jet) -> Jet { Jet::constant(self).$f(o) }
        }
    )*};
}
scalar_ops!(Add add, Sub sub, Mul mul, Div div);
