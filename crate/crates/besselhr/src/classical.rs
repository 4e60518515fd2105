//! Classical Bessel functions of complex order: J_ν and I_ν by their power
//! series in multiprecision, and Y_ν, K_ν, H^{(1,2)}_ν by the connection
//! formulas, evaluated before rounding so that the exponentially small K_ν
//! survives. Independent of the rank-n machinery; used as a reference.
//!
//! Non-integer order only (the connection formulas divide by sin νπ).

use crate::error::{Error, Result};
use crate::index::C64;
use crate::mp::{self, Mp};

fn working_bits(nu: C64, z: C64) -> usize {
    // J and I terms peak near e^{|z|}; K cancels two such sums down to e^{−|z|}.
    64 + (3.0 * z.norm() / std::f64::consts::LN_2) as usize + (nu.norm() * 2.0) as usize + 32
}

/// Σ_k (sign)^k (z/2)^{2k+ν} / (k! Γ(k+ν+1)).
fn series(nu: &Mp, z: &Mp, alternating: bool, p: usize) -> Mp {
    let half = z.mul_f64(0.5);
    let mut term = half.ln().mul(nu).exp().mul(&mp::recip_gamma(&nu.add_f64(1.0)));
    let mut q = half.mul(&half);
    if alternating {
        q = q.neg();
    }
    let mut sum = term.clone();
    let zabs = z.abs_f64();
    let mut k = 1u32;
    loop {
        // term_k = term_{k−1} q / (k (k + ν))
        let den = nu.add_f64(k as f64).mul_f64(k as f64);
        term = term.mul(&q).div(&den);
        sum = sum.add(&term);
        let small = term.is_zero() || term.log2_abs() < sum.log2_abs() - p as i64 - 8;
        if k as f64 > zabs + nu.abs_f64() + 2.0 && small {
            break;
        }
        k += 1;
        if k > 100_000 {
            break;
        }
    }
    sum
}

fn check_order(nu: C64) -> Result<()> {
    if nu.im == 0.0 && nu.re == nu.re.round() {
        return Err(Error::Invalid(format!("integer order {} is not supported", nu.re)));
    }
    Ok(())
}

struct Parts {
    p: usize,
    nu: Mp,
    z: Mp,
}

impl Parts {
    fn new(nu: C64, z: C64) -> Self {
        let p = working_bits(nu, z);
        Parts { p, nu: Mp::from_c64(nu, p), z: Mp::from_c64(z, p) }
    }

    fn j(&self, neg: bool) -> Mp {
        let nu = if neg { self.nu.neg() } else { self.nu.clone() };
        series(&nu, &self.z, true, self.p)
    }

    fn i(&self, neg: bool) -> Mp {
        let nu = if neg { self.nu.neg() } else { self.nu.clone() };
        series(&nu, &self.z, false, self.p)
    }

    fn sin_cos_nu_pi(&self) -> (Mp, Mp) {
        let pi = Mp::from_parts(mp::pi(self.p), mp::bf(0.0, self.p), self.p);
        let a = self.nu.mul(&pi);
        let half_pi = pi.mul_f64(0.5);
        (a.sin(), a.add(&half_pi).sin())
    }

    fn y(&self) -> Mp {
        let (s, c) = self.sin_cos_nu_pi();
        self.j(false).mul(&c).sub(&self.j(true)).div(&s)
    }
}

pub fn bessel_j(nu: C64, z: C64) -> C64 {
    Parts::new(nu, z).j(false).to_c64()
}

pub fn bessel_i(nu: C64, z: C64) -> C64 {
    Parts::new(nu, z).i(false).to_c64()
}

/// Y_ν = (J_ν cos νπ − J_{−ν}) / sin νπ.
pub fn bessel_y(nu: C64, z: C64) -> Result<C64> {
    check_order(nu)?;
    Ok(Parts::new(nu, z).y().to_c64())
}

/// K_ν = (π/2)(I_{−ν} − I_ν) / sin νπ.
pub fn bessel_k(nu: C64, z: C64) -> Result<C64> {
    check_order(nu)?;
    let t = Parts::new(nu, z);
    let (s, _) = t.sin_cos_nu_pi();
    let pi = mp::bf_to_f64(&mp::pi(64));
    Ok(t.i(true).sub(&t.i(false)).div(&s).mul_f64(0.5).to_c64() * pi)
}

/// H^{(1)}_ν = J_ν + iY_ν.
pub fn hankel1(nu: C64, z: C64) -> Result<C64> {
    check_order(nu)?;
    let t = Parts::new(nu, z);
    Ok(t.j(false).add(&t.y().mul_i()).to_c64())
}

/// H^{(2)}_ν = J_ν − iY_ν.
pub fn hankel2(nu: C64, z: C64) -> Result<C64> {
    check_order(nu)?;
    let t = Parts::new(nu, z);
    Ok(t.j(false).sub(&t.y().mul_i()).to_c64())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn rel(a: C64, b: C64) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn half_integer_orders_are_elementary() {
        // J_{1/2}(x) = √(2/(πx)) sin x, K_{1/2}(x) = √(π/(2x)) e^{−x}
        for x in [0.3, 2.0, 17.0, 40.0] {
            let s = (2.0 / (std::f64::consts::PI * x)).sqrt();
            assert!(rel(bessel_j(c(0.5, 0.0), c(x, 0.0)), c(s * x.sin(), 0.0)) < 1e-14);
            assert!(rel(bessel_y(c(0.5, 0.0), c(x, 0.0)).unwrap(), c(-s * x.cos(), 0.0)) < 1e-13);
            let k = (std::f64::consts::PI / (2.0 * x)).sqrt() * (-x).exp();
            assert!(rel(bessel_k(c(0.5, 0.0), c(x, 0.0)).unwrap(), c(k, 0.0)) < 1e-14);
            let i = s * x.sinh();
            assert!(rel(bessel_i(c(0.5, 0.0), c(x, 0.0)), c(i, 0.0)) < 1e-14);
        }
    }

    #[test]
    fn wronskian_complex_order() {
        // J_ν Y'_ν − J'_ν Y_ν = 2/(πx), checked through J_{ν+1}Y_ν − J_ν Y_{ν+1} = 2/(πx)
        let nu = c(0.2, 0.7);
        let x = c(5.5, 0.0);
        let lhs = bessel_j(nu + 1.0, x) * bessel_y(nu, x).unwrap() - bessel_j(nu, x) * bessel_y(nu + 1.0, x).unwrap();
        assert!(rel(lhs, c(2.0 / (std::f64::consts::PI * x.re), 0.0)) < 1e-13);
    }

    #[test]
    fn integer_order_rejected() {
        assert!(bessel_k(c(2.0, 0.0), c(1.0, 0.0)).is_err());
    }
}
