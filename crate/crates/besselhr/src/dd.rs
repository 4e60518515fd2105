//! Double-double ("pair") arithmetic, about 106 significant bits.
//!
//! Used for the asymptotic-coefficient recurrence, whose terms cancel.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::index::C64;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    pub fn new(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Self {
        Dd::new(x)
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, b: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b * Dd::new(q1);
        let q2 = r.hi / b.hi;
        let r = r - b * Dd::new(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::new(q3)
    }
}

/// Complex double-double.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Cdd {
    pub re: Dd,
    pub im: Dd,
}

impl Cdd {
    pub const ZERO: Cdd = Cdd { re: Dd::ZERO, im: Dd::ZERO };
    pub const ONE: Cdd = Cdd { re: Dd::ONE, im: Dd::ZERO };

    pub fn new(re: Dd, im: Dd) -> Self {
        Cdd { re, im }
    }

    pub fn real(x: f64) -> Self {
        Cdd { re: Dd::new(x), im: Dd::ZERO }
    }

    pub fn to_c64(self) -> C64 {
        C64::new(self.re.to_f64(), self.im.to_f64())
    }

    pub fn scale(self, k: Dd) -> Self {
        Cdd { re: self.re * k, im: self.im * k }
    }

    pub fn norm_sqr(self) -> Dd {
        self.re * self.re + self.im * self.im
    }
}

impl From<C64> for Cdd {
    fn from(z: C64) -> Self {
        Cdd { re: Dd::new(z.re), im: Dd::new(z.im) }
    }
}

impl Neg for Cdd {
    type Output = Cdd;
    fn neg(self) -> Cdd {
        Cdd { re: -self.re, im: -self.im }
    }
}

impl Add for Cdd {
    type Output = Cdd;
    fn add(self, b: Cdd) -> Cdd {
        Cdd { re: self.re + b.re, im: self.im + b.im }
    }
}

impl Sub for Cdd {
    type Output = Cdd;
    fn sub(self, b: Cdd) -> Cdd {
        Cdd { re: self.re - b.re, im: self.im - b.im }
    }
}

impl Mul for Cdd {
    type Output = Cdd;
    fn mul(self, b: Cdd) -> Cdd {
        Cdd { re: self.re * b.re - self.im * b.im, im: self.re * b.im + self.im * b.re }
    }
}

impl Div for Cdd {
    type Output = Cdd;
    fn div(self, b: Cdd) -> Cdd {
        let d = b.norm_sqr();
        let num = self * Cdd { re: b.re, im: -b.im };
        Cdd { re: num.re / d, im: num.im / d }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_bits_lost_in_double() {
        let third = Dd::ONE / Dd::new(3.0);
        let back = third * Dd::new(3.0) - Dd::ONE;
        assert!(back.to_f64().abs() < 1e-31);
        // (1 + 2^-60)^2 − 1 = 2^-59 + 2^-120, invisible in plain f64
        let x = Dd::ONE + Dd::new(2f64.powi(-60));
        let y = x * x - Dd::ONE;
        assert!((y.to_f64() - 2f64.powi(-59)).abs() < 1e-33);
    }

    #[test]
    fn complex_division_round_trip() {
        let a = Cdd::from(C64::new(0.3, -1.7));
        let b = Cdd::from(C64::new(-2.1, 0.4));
        let r = (a / b) * b - a;
        assert!(r.to_c64().norm() < 1e-30);
    }
}
