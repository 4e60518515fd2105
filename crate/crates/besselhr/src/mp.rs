//! Multiprecision complex arithmetic on top of `astro-float`, with a
//! Stirling-series gamma function.
//!
//! The ascending series for J(z;ς,λ) cancel by up to e^{2n|z|}, so they are
//! summed here at a working precision chosen from |z|.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::index::C64;

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("astro-float constants cache"));
}

fn with_cc<R>(f: impl FnOnce(&mut Consts) -> R) -> R {
    CONSTS.with(|cc| f(&mut cc.borrow_mut()))
}

/// ldexp without intermediate overflow.
fn ldexp(m: f64, mut e: i64) -> f64 {
    let mut v = m;
    while e > 1000 {
        v *= 2f64.powi(1000);
        e -= 1000;
        if v.is_infinite() {
            return v;
        }
    }
    while e < -1000 {
        v *= 2f64.powi(-1000);
        e += 1000;
        if v == 0.0 {
            return v;
        }
    }
    v * 2f64.powi(e as i32)
}

pub fn bf_to_f64(x: &BigFloat) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x.is_inf_pos() {
        return f64::INFINITY;
    }
    if x.is_inf_neg() {
        return f64::NEG_INFINITY;
    }
    if x.is_zero() {
        return 0.0;
    }
    let (m, _, s, e, _) = x.as_raw_parts().expect("finite value");
    // words are 32 bits on wasm32
    let bits = (std::mem::size_of_val(&m[0]) * 8) as i32;
    let top = m[m.len() - 1] as f64;
    let next = if m.len() > 1 { m[m.len() - 2] as f64 } else { 0.0 };
    // 0.m × 2^e with the leading word normalized
    let mant = (top + next * 2f64.powi(-bits)) * 2f64.powi(-bits);
    let v = ldexp(mant, e as i64);
    if x.is_negative() || s == astro_float::Sign::Neg {
        -v
    } else {
        v
    }
}

/// Binary exponent of x (|x| ∈ [2^{e−1}, 2^e)), or a very negative number at zero.
fn bf_exponent(x: &BigFloat) -> i64 {
    if x.is_zero() {
        i64::MIN / 4
    } else {
        x.exponent().map(|e| e as i64).unwrap_or(i64::MAX / 4)
    }
}

/// A multiprecision complex number carrying its working precision in bits.
#[derive(Clone, Debug)]
pub struct Mp {
    pub re: BigFloat,
    pub im: BigFloat,
    p: usize,
}

impl Mp {
    pub fn zero(p: usize) -> Self {
        Mp { re: BigFloat::from_f64(0.0, p), im: BigFloat::from_f64(0.0, p), p }
    }

    pub fn one(p: usize) -> Self {
        Self::real(1.0, p)
    }

    pub fn real(x: f64, p: usize) -> Self {
        Mp { re: BigFloat::from_f64(x, p), im: BigFloat::from_f64(0.0, p), p }
    }

    pub fn from_c64(z: C64, p: usize) -> Self {
        Mp { re: BigFloat::from_f64(z.re, p), im: BigFloat::from_f64(z.im, p), p }
    }

    pub fn from_parts(re: BigFloat, im: BigFloat, p: usize) -> Self {
        Mp { re, im, p }
    }

    pub fn from_int(k: i64, p: usize) -> Self {
        Mp { re: BigFloat::from_i64(k, p), im: BigFloat::from_f64(0.0, p), p }
    }

    pub fn precision(&self) -> usize {
        self.p
    }

    pub fn to_c64(&self) -> C64 {
        C64::new(bf_to_f64(&self.re), bf_to_f64(&self.im))
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    /// Approximate log2|z| (within one unit), useful for bookkeeping of cancellation.
    pub fn log2_abs(&self) -> i64 {
        bf_exponent(&self.re).max(bf_exponent(&self.im))
    }

    /// |z| as f64 (may over/underflow for extreme values).
    pub fn abs_f64(&self) -> f64 {
        let e = self.log2_abs();
        if e < -(1 << 40) {
            return 0.0;
        }
        // scale before squaring to avoid overflow
        let r = ldexp(bf_to_f64(&self.re), -e);
        let i = ldexp(bf_to_f64(&self.im), -e);
        ldexp(r.hypot(i), e)
    }

    pub fn add(&self, o: &Mp) -> Mp {
        Mp { re: self.re.add(&o.re, self.p, RM), im: self.im.add(&o.im, self.p, RM), p: self.p }
    }

    pub fn sub(&self, o: &Mp) -> Mp {
        Mp { re: self.re.sub(&o.re, self.p, RM), im: self.im.sub(&o.im, self.p, RM), p: self.p }
    }

    pub fn neg(&self) -> Mp {
        Mp { re: self.re.neg(), im: self.im.neg(), p: self.p }
    }

    pub fn mul(&self, o: &Mp) -> Mp {
        let p = self.p;
        let rr = self.re.mul(&o.re, p, RM);
        let ii = self.im.mul(&o.im, p, RM);
        let ri = self.re.mul(&o.im, p, RM);
        let ir = self.im.mul(&o.re, p, RM);
        Mp { re: rr.sub(&ii, p, RM), im: ri.add(&ir, p, RM), p }
    }

    pub fn mul_real(&self, k: &BigFloat) -> Mp {
        Mp { re: self.re.mul(k, self.p, RM), im: self.im.mul(k, self.p, RM), p: self.p }
    }

    pub fn mul_f64(&self, k: f64) -> Mp {
        self.mul_real(&BigFloat::from_f64(k, self.p))
    }

    pub fn add_f64(&self, k: f64) -> Mp {
        Mp { re: self.re.add(&BigFloat::from_f64(k, self.p), self.p, RM), im: self.im.clone(), p: self.p }
    }

    pub fn conj(&self) -> Mp {
        Mp { re: self.re.clone(), im: self.im.neg(), p: self.p }
    }

    /// Multiplication by i.
    pub fn mul_i(&self) -> Mp {
        Mp { re: self.im.neg(), im: self.re.clone(), p: self.p }
    }

    pub fn norm_sqr(&self) -> BigFloat {
        let p = self.p;
        self.re.mul(&self.re, p, RM).add(&self.im.mul(&self.im, p, RM), p, RM)
    }

    pub fn recip(&self) -> Mp {
        let p = self.p;
        let d = self.norm_sqr();
        Mp { re: self.re.div(&d, p, RM), im: self.im.neg().div(&d, p, RM), p }
    }

    pub fn div(&self, o: &Mp) -> Mp {
        let p = self.p;
        let d = o.norm_sqr();
        let num = self.mul(&o.conj());
        Mp { re: num.re.div(&d, p, RM), im: num.im.div(&d, p, RM), p }
    }

    pub fn exp(&self) -> Mp {
        let p = self.p;
        with_cc(|cc| {
            let m = self.re.exp(p, RM, cc);
            let c = self.im.cos(p, RM, cc);
            let s = self.im.sin(p, RM, cc);
            Mp { re: m.mul(&c, p, RM), im: m.mul(&s, p, RM), p }
        })
    }

    /// exp(i·θ) for real θ.
    pub fn cis(theta: &BigFloat, p: usize) -> Mp {
        with_cc(|cc| Mp { re: theta.cos(p, RM, cc), im: theta.sin(p, RM, cc), p })
    }

    /// Principal logarithm.
    pub fn ln(&self) -> Mp {
        let p = self.p;
        with_cc(|cc| {
            let half = BigFloat::from_f64(0.5, p);
            let lr = self.norm_sqr().ln(p, RM, cc).mul(&half, p, RM);
            Mp { re: lr, im: atan2(&self.im, &self.re, p, cc), p }
        })
    }

    /// sin z = sin a cosh b + i cos a sinh b.
    pub fn sin(&self) -> Mp {
        let p = self.p;
        with_cc(|cc| {
            let (sa, ca) = (self.re.sin(p, RM, cc), self.re.cos(p, RM, cc));
            let eb = self.im.exp(p, RM, cc);
            let emb = BigFloat::from_f64(1.0, p).div(&eb, p, RM);
            let half = BigFloat::from_f64(0.5, p);
            let ch = eb.add(&emb, p, RM).mul(&half, p, RM);
            let sh = eb.sub(&emb, p, RM).mul(&half, p, RM);
            Mp { re: sa.mul(&ch, p, RM), im: ca.mul(&sh, p, RM), p }
        })
    }

    /// z^k for a nonnegative integer k.
    pub fn powi(&self, k: u32) -> Mp {
        let mut result = Mp::one(self.p);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul(&base);
            }
            base = base.mul(&base);
            k >>= 1;
        }
        result
    }
}

pub fn pi(p: usize) -> BigFloat {
    with_cc(|cc| cc.pi(p, RM))
}

pub fn bf(x: f64, p: usize) -> BigFloat {
    BigFloat::from_f64(x, p)
}

fn atan2(y: &BigFloat, x: &BigFloat, p: usize, cc: &mut Consts) -> BigFloat {
    let pi = cc.pi(p, RM);
    if x.is_zero() {
        if y.is_zero() {
            return BigFloat::from_f64(0.0, p);
        }
        let h = pi.mul(&BigFloat::from_f64(0.5, p), p, RM);
        return if y.is_negative() { h.neg() } else { h };
    }
    // atan of a ratio larger than 1 loses nothing, but keep the argument small
    let swap = y.abs().cmp(&x.abs()).map(|o| o > 0).unwrap_or(false);
    let base = if swap {
        let h = pi.mul(&BigFloat::from_f64(0.5, p), p, RM);
        let t = x.div(y, p, RM).atan(p, RM, cc);
        if y.is_negative() {
            h.neg().sub(&t, p, RM)
        } else {
            h.sub(&t, p, RM)
        }
    } else {
        let t = y.div(x, p, RM).atan(p, RM, cc);
        if x.is_negative() {
            if y.is_negative() {
                t.sub(&pi, p, RM)
            } else {
                t.add(&pi, p, RM)
            }
        } else {
            t
        }
    };
    base
}

/// Tangent numbers T_1..T_k (T_1 = 1, T_2 = 2, T_3 = 16, …).
fn tangent_numbers(k: usize) -> Vec<BigInt> {
    let mut t = vec![BigInt::zero(); k + 1];
    if k == 0 {
        return t;
    }
    t[1] = BigInt::one();
    for j in 2..=k {
        t[j] = &t[j - 1] * BigInt::from(j - 1);
    }
    for j in 2..=k {
        for i in j..=k {
            t[i] = &t[i - 1] * BigInt::from(i - j) + &t[i] * BigInt::from(i - j + 2);
        }
    }
    t
}

const STIRLING_TERMS: usize = 100;

/// Stirling coefficients B_{2k}/(2k(2k−1)) as exact (numerator, denominator).
fn stirling_rationals() -> &'static Vec<(BigInt, BigInt)> {
    static CELL: OnceLock<Vec<(BigInt, BigInt)>> = OnceLock::new();
    CELL.get_or_init(|| {
        let t = tangent_numbers(STIRLING_TERMS);
        (1..=STIRLING_TERMS)
            .map(|k| {
                // B_{2k} = (−1)^{k−1} 2k T_k / (4^k (4^k − 1))
                let four_k = BigInt::one() << (2 * k);
                let mut num = BigInt::from(2 * k) * &t[k];
                if k % 2 == 0 {
                    num = -num;
                }
                let den = &four_k * (&four_k - BigInt::one()) * BigInt::from(2 * k * (2 * k - 1));
                (num, den)
            })
            .collect()
    })
}

struct StirlingPlan {
    coeffs: Vec<BigFloat>,
    radius: f64,
    ln_sqrt_2pi: BigFloat,
}

fn stirling_plan(p: usize) -> std::sync::Arc<StirlingPlan> {
    static CACHE: OnceLock<Mutex<HashMap<usize, std::sync::Arc<StirlingPlan>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(plan) = cache.lock().expect("stirling cache").get(&p) {
        return plan.clone();
    }
    // Choose the shift radius R so that the first omitted term is below 2^{-p-16}.
    let target = -(p as f64) - 16.0;
    let ln2 = std::f64::consts::LN_2;
    let log2_omitted = |k: usize, r: f64| {
        // |B_{2k+2}| / ((2k+2)(2k+1) r^{2k+1}) with |B_{2m}| ≈ 2 (2m)! / (2π)^{2m}
        let m = (2 * k + 2) as f64;
        (2f64.ln() + ln_factorial(m) - m * (2.0 * std::f64::consts::PI).ln() - (m * (m - 1.0)).ln()
            - (m - 1.0) * r.ln())
            / ln2
    };
    let mut radius = 8.0f64;
    let mut terms = STIRLING_TERMS;
    loop {
        let k = ((std::f64::consts::PI * radius).ceil() as usize).clamp(4, STIRLING_TERMS);
        if log2_omitted(k, radius) <= target {
            terms = terms.min(k);
            break;
        }
        radius *= 1.1;
    }
    let coeffs = with_cc(|cc| {
        stirling_rationals()[..terms]
            .iter()
            .map(|(n, d)| {
                let nb = BigFloat::parse(&n.to_string(), Radix::Dec, p, RM, cc);
                let db = BigFloat::parse(&d.to_string(), Radix::Dec, p, RM, cc);
                nb.div(&db, p, RM)
            })
            .collect()
    });
    let ln_sqrt_2pi = with_cc(|cc| {
        let two_pi = cc.pi(p, RM).mul(&BigFloat::from_f64(2.0, p), p, RM);
        two_pi.ln(p, RM, cc).mul(&BigFloat::from_f64(0.5, p), p, RM)
    });
    let plan = std::sync::Arc::new(StirlingPlan { coeffs, radius, ln_sqrt_2pi });
    cache.lock().expect("stirling cache").insert(p, plan.clone());
    plan
}

fn ln_factorial(m: f64) -> f64 {
    crate::gamma::log_gamma(C64::new(m + 1.0, 0.0)).expect("positive argument").re
}

/// (∏_{j<N}(a+j), ln Γ(a+N)) with a+N inside the Stirling region.
fn shifted_ln_gamma(a: &Mp) -> (Mp, Mp) {
    let p = a.precision();
    let plan = stirling_plan(p);
    let a64 = a.to_c64();
    let mut shift = 0usize;
    while C64::new(a64.re + shift as f64, a64.im).norm() < plan.radius || a64.re + (shift as f64) < plan.radius * 0.5
    {
        shift += 1;
    }
    let mut prod = Mp::one(p);
    for j in 0..shift {
        prod = prod.mul(&a.add_f64(j as f64));
    }
    let z = a.add_f64(shift as f64);
    let w = z.recip();
    let w2 = w.mul(&w);
    let mut series = Mp::zero(p);
    for c in plan.coeffs.iter().rev() {
        series = series.mul(&w2);
        series = Mp { re: series.re.add(c, p, RM), im: series.im.clone(), p };
    }
    let series = series.mul(&w);
    let ln_gamma =
        z.add_f64(-0.5).mul(&z.ln()).sub(&z).add(&Mp { re: plan.ln_sqrt_2pi.clone(), im: bf(0.0, p), p }).add(&series);
    (prod, ln_gamma)
}

/// Γ(a) at the precision of a. Infinite (NaN parts) at the poles.
pub fn gamma(a: &Mp) -> Mp {
    let (prod, lg) = shifted_ln_gamma(a);
    lg.exp().div(&prod)
}

/// 1/Γ(a), exactly zero at the poles of Γ.
pub fn recip_gamma(a: &Mp) -> Mp {
    let (prod, lg) = shifted_ln_gamma(a);
    if prod.is_zero() {
        return Mp::zero(a.precision());
    }
    prod.mul(&lg.neg().exp())
}
