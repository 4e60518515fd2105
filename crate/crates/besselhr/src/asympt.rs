//! Bessel functions of the second kind J(z;λ;ξ) by their asymptotic expansion
//!
//! J(z;λ;ξ) ~ e^{inξz} z^{−(n−1)/2} Σ_m B_m(λ;ξ) z^{−m},
//!
//! valid on the sector |arg z − arg(iξ̄)| < π + π/n − ϑ, together with the
//! H-Bessel functions, the expansion of J(z;ς,λ) and the connection formulas
//! relating the two kinds.
//!
//! Truncation is superasymptotic: the sum stops before the smallest term, and
//! the error estimate is twice that term plus the size of any exponentially
//! smaller solution that may be switched on at z.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use crate::coeffs::{build_b_table, BTable, B_MAX_TERMS};
use crate::error::{Error, Result};
use crate::index::{elementary_symmetric, RootOfUnity, SignVector, SpectralIndex, SurfacePoint, C64};
use crate::{EvalResult, Method};

/// Default sector margin ϑ.
pub const DEFAULT_THETA: f64 = PI / 6.0;
/// Default cap on the number of terms.
pub const DEFAULT_M_CAP: usize = 30;
/// c in the validity floor |z| ≥ c·𝔈², 𝔈 = 1 + max|λ_l|.
pub const FLOOR_CONSTANT: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AsymptoticEval {
    pub value: C64,
    /// Number of terms summed (B_0 … B_{m−1}).
    pub truncation_m: usize,
    pub error_estimate: f64,
    pub in_sector: bool,
}

impl AsymptoticEval {
    pub fn to_result(&self) -> EvalResult {
        EvalResult { value: self.value, error_estimate: self.error_estimate, method: Method::Asymptotic }
    }

    fn scaled(self, k: C64) -> Self {
        AsymptoticEval { value: self.value * k, error_estimate: self.error_estimate * k.norm(), ..self }
    }
}

/// |arg z − arg(iξ̄)| in designated arguments.
pub fn sector_offset(z: &SurfacePoint, xi: &RootOfUnity) -> f64 {
    (z.argument - (PI / 2.0 - xi.argument())).abs()
}

/// π + π/n − ϑ.
pub fn sector_limit(n: usize, theta: f64) -> f64 {
    PI + PI / n as f64 - theta
}

pub fn validity_floor(lambda: &SpectralIndex) -> f64 {
    FLOOR_CONSTANT * lambda.size_bound().powi(2)
}

type BKey = (Vec<u64>, usize, i64);

fn b_cache() -> &'static Mutex<HashMap<BKey, Arc<BTable>>> {
    static CACHE: OnceLock<Mutex<HashMap<BKey, Arc<BTable>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// B_0 … B_{B_MAX_TERMS} for (λ, ξ), memoized; B depends on ξ only through
/// its value.
pub fn b_table(lambda: &SpectralIndex, xi: &RootOfUnity) -> Arc<BTable> {
    let n = lambda.rank();
    let k = xi.index().rem_euclid(2 * n as i64);
    let key: BKey = (lambda.lambda().iter().flat_map(|c| [c.re.to_bits(), c.im.to_bits()]).collect(), n, k);
    if let Some(t) = b_cache().lock().expect("B cache").get(&key) {
        return t.clone();
    }
    let table = Arc::new(build_b_table(lambda, &RootOfUnity::new(n, k), B_MAX_TERMS));
    let mut cache = b_cache().lock().expect("B cache");
    if cache.len() > 4096 {
        cache.clear();
    }
    cache.insert(key, table.clone());
    table
}

struct Truncated {
    sum: C64,
    m: usize,
    /// 2 × the first omitted term, plus rounding
    err: f64,
}

/// Sums `terms` up to (not including) the smallest one among 1..=m_cap.
/// The size of a term is judged together with its successor so that an
/// isolated near-zero coefficient does not stop the sum early.
fn truncate(terms: &[C64], m_cap: usize) -> Truncated {
    let m_cap = m_cap.clamp(1, terms.len() - 2);
    let size = |m: usize| terms[m].norm().max(terms[m + 1].norm());
    let mut best = 1;
    for m in 2..=m_cap {
        if size(m) < size(best) {
            best = m;
        }
    }
    let sum: C64 = terms[..best].iter().sum();
    let abs: f64 = terms[..best].iter().map(|t| t.norm()).sum();
    Truncated { sum, m: best, err: 2.0 * size(best) + 4.0 * f64::EPSILON * abs }
}

/// Largest relative size e^{n Re(i(ξ'−ξ)z)} < 1 of another exponential
/// e^{inξ'z}, ξ' ∈ X_n(ξⁿ), at z: the most a Stokes switch-on can add.
fn switching_bound(z: C64, xi: &RootOfUnity, n: usize) -> f64 {
    let xv = xi.value();
    let odd = if xi.nth_power_sign() < 0 { 1 } else { 0 };
    (0..n)
        .map(|k| C64::from_polar(1.0, PI * (2 * k + odd) as f64 / n as f64))
        .filter(|xp| (xp - xv).norm() > 1e-9)
        .map(|xp| n as f64 * (C64::i() * (xp - xv) * z).re)
        // exponents lost in rounding mean equal size (an anti-Stokes line)
        .filter(|e| *e < -1e-9 * (1.0 + n as f64 * z.norm()))
        .map(f64::exp)
        .fold(0.0, f64::max)
}

fn check_domain(z: &SurfacePoint, lambda: &SpectralIndex, xi: &RootOfUnity, theta: f64) -> Result<()> {
    let n = lambda.rank();
    if xi.rank() != n {
        return Err(Error::Invalid(format!("root of unity of rank {} for an index of rank {n}", xi.rank())));
    }
    let offset = sector_offset(z, xi);
    let limit = sector_limit(n, theta);
    if offset >= limit {
        return Err(Error::OutOfSector { offset, limit });
    }
    let floor = validity_floor(lambda);
    if z.modulus() < floor {
        return Err(Error::BelowFloor { modulus: z.modulus(), floor });
    }
    Ok(())
}

/// B_m z^{−m} for m = 0..=B_MAX_TERMS.
fn expansion_terms(table: &BTable, z: &SurfacePoint) -> Vec<C64> {
    let zinv = (-z.ln()).exp();
    let mut p = C64::new(1.0, 0.0);
    table
        .b
        .iter()
        .map(|b| {
            let t = b * p;
            p *= zinv;
            t
        })
        .collect()
}

/// J(z;λ;ξ) by its truncated asymptotic expansion.
pub fn second_kind(
    z: &SurfacePoint,
    lambda: &SpectralIndex,
    xi: &RootOfUnity,
    theta: f64,
    m_cap: usize,
) -> Result<AsymptoticEval> {
    check_domain(z, lambda, xi, theta)?;
    let n = lambda.rank();
    let table = b_table(lambda, xi);
    let t = truncate(&expansion_terms(&table, z), m_cap);
    let zc = z.to_complex();
    let h = (n as f64 - 1.0) / 2.0;
    let pre = (C64::new(0.0, n as f64) * xi.value() * zc - h * z.ln()).exp();
    let switch = switching_bound(zc, xi, n) * t.sum.norm();
    Ok(AsymptoticEval {
        value: pre * t.sum,
        truncation_m: t.m,
        error_estimate: pre.norm() * (t.err + switch),
        in_sector: true,
    })
}

fn unit_root(n: usize, sign: i8) -> RootOfUnity {
    if sign > 0 {
        RootOfUnity::one(n)
    } else {
        RootOfUnity::minus_one(n)
    }
}

/// (±2πi)^{(n−1)/2} with arg(±i) = ±π/2.
fn two_pi_i_pow(n: usize, sign: i8) -> C64 {
    let h = (n as f64 - 1.0) / 2.0;
    C64::from_polar((2.0 * PI).powf(h), sign as f64 * PI * h / 2.0)
}

/// H^±(z;λ) = n^{−1/2}(±2πi)^{(n−1)/2} J(z;λ;±1).
pub fn h_bessel(z: &SurfacePoint, lambda: &SpectralIndex, sign: i8) -> Result<AsymptoticEval> {
    let n = lambda.rank();
    let j = second_kind(z, lambda, &unit_root(n, sign), DEFAULT_THETA, DEFAULT_M_CAP)?;
    Ok(j.scaled(two_pi_i_pow(n, sign) / (n as f64).sqrt()))
}

/// W^{±,(j)}(z;λ) for j = 0..=j_max, where W^± = e^{∓inz} J(z;λ;±1), by
/// term-wise differentiation of the expansion z^{−(n−1)/2} Σ B_m(λ;±1) z^{−m}.
pub fn w_function(z: &SurfacePoint, lambda: &SpectralIndex, sign: i8, j_max: usize) -> Result<Vec<AsymptoticEval>> {
    let n = lambda.rank();
    let xi = unit_root(n, sign);
    check_domain(z, lambda, &xi, DEFAULT_THETA)?;
    let table = b_table(lambda, &xi);
    let base = expansion_terms(&table, z);
    let h = (n as f64 - 1.0) / 2.0;
    let zinv = (-z.ln()).exp();
    let zh = (-h * z.ln()).exp();
    let switch = switching_bound(z.to_complex(), &xi, n);
    let mut out = Vec::with_capacity(j_max + 1);
    let mut terms = base;
    for j in 0..=j_max {
        if j > 0 {
            // d/dz z^{−h−m−(j−1)} = −(h+m+j−1) z^{−h−m−j}
            for (m, t) in terms.iter_mut().enumerate() {
                *t *= -(h + (m + j - 1) as f64) * zinv;
            }
        }
        let t = truncate(&terms, DEFAULT_M_CAP);
        out.push(AsymptoticEval {
            value: zh * t.sum,
            truncation_m: t.m,
            error_estimate: zh.norm() * (t.err + switch * t.sum.norm()),
            in_sector: true,
        });
    }
    Ok(out)
}

/// c(ς,λ) = e(−(n−1)/8 + (n−1)n₊/(4n) − ½Σ_{l∈L₊}λ_l).
pub fn varsigma_constant(signs: &SignVector, lambda: &SpectralIndex) -> C64 {
    let n = signs.rank() as f64;
    let sum: C64 = signs.positions(1).iter().map(|&l| lambda.lambda()[l - 1]).sum();
    let t = -(n - 1.0) / 8.0 + (n - 1.0) * signs.n_plus() as f64 / (4.0 * n) - 0.5 * sum;
    (C64::new(0.0, 2.0 * PI) * t).exp()
}

/// J(z;ς,λ) = ((2π)^{(n−1)/2} c(ς,λ)/√n) J(z;λ;ξ(ς)).
pub fn j_varsigma_asymptotic(z: &SurfacePoint, signs: &SignVector, lambda: &SpectralIndex) -> Result<AsymptoticEval> {
    let n = lambda.rank();
    if signs.rank() != n {
        return Err(Error::Invalid(format!("sign vector has length {} but the index has rank {n}", signs.rank())));
    }
    let j = second_kind(z, lambda, &signs.xi(), DEFAULT_THETA, DEFAULT_M_CAP)?;
    let h = (n as f64 - 1.0) / 2.0;
    Ok(j.scaled((2.0 * PI).powf(h) * varsigma_constant(signs, lambda) / (n as f64).sqrt()))
}

/// J(z;λ;ξ) = (±ξ)^{(n−1)/2} J(±ξz;λ;±1), with −ξ carrying the argument
/// arg ξ − π.
pub fn rotate_second_kind_via(
    z: &SurfacePoint,
    lambda: &SpectralIndex,
    xi: &RootOfUnity,
    branch: i8,
) -> Result<AsymptoticEval> {
    let n = lambda.rank();
    let r = if branch > 0 { *xi } else { xi.negated() };
    let rotated = z.times_root(&r);
    let j = second_kind(&rotated, lambda, &unit_root(n, branch), DEFAULT_THETA, DEFAULT_M_CAP)?;
    Ok(j.scaled(r.powf((n as f64 - 1.0) / 2.0)))
}

/// J(z;λ;ξ) through the plus branch J(z;λ;ξ) = ξ^{(n−1)/2} J(ξz;λ;1).
pub fn rotate_second_kind(z: &SurfacePoint, lambda: &SpectralIndex, xi: &RootOfUnity) -> Result<AsymptoticEval> {
    rotate_second_kind_via(z, lambda, xi, 1)
}

/// Inverse of the Vandermonde matrix (x_l^{j−1})_{j,l}: entry (m, j) is
/// (−1)^{n−j} σ_{m,n−j} / τ_m, with σ_{m,d} the elementary symmetric
/// polynomials of the x_k, k ≠ m, and τ_m = ∏_{k≠m}(x_m − x_k).
pub fn vandermonde_inverse(x: &[C64]) -> Result<Vec<Vec<C64>>> {
    let n = x.len();
    let mut inv = vec![vec![C64::new(0.0, 0.0); n]; n];
    for m in 0..n {
        let others: Vec<C64> = (0..n).filter(|&k| k != m).map(|k| x[k]).collect();
        let tau: C64 = others.iter().map(|xk| x[m] - xk).product();
        if tau.norm() == 0.0 {
            return Err(Error::Degenerate(0.0));
        }
        let sigma = elementary_symmetric(&others);
        for j in 1..=n {
            let sign = if (n - j) % 2 == 0 { 1.0 } else { -1.0 };
            inv[m][j - 1] = sign * sigma[n - j] / tau;
        }
    }
    Ok(inv)
}

/// J_l(z;(−1)^a,λ), l = 1..=n, reconstructed from the second-kind functions
/// J(z;λ;ξ_j), ξ_j = e^{πi(2j+a−2)/n} (designated arguments).
pub fn inverse_connection(z: &SurfacePoint, lambda: &SpectralIndex, a: i64) -> Result<Vec<EvalResult>> {
    let n = lambda.rank();
    let gap = lambda.genericity_gap();
    if gap < crate::series::GENERICITY_EPS {
        return Err(Error::Degenerate(gap));
    }
    let h = (n as f64 - 1.0) / 2.0;
    let mut second = Vec::with_capacity(n);
    for j in 1..=n as i64 {
        let xi = RootOfUnity::new(n, 2 * j + a - 2);
        let v = second_kind(z, lambda, &xi, DEFAULT_THETA, DEFAULT_M_CAP)?;
        // (−1)^{n−j} ξ_j^{−(n−1)/2}
        let sign = if (n as i64 - j) % 2 == 0 { 1.0 } else { -1.0 };
        second.push((sign * xi.powf(-h), v));
    }
    let lam = lambda.lambda();
    let x: Vec<C64> = lam.iter().map(|l| (C64::new(0.0, -2.0 * PI) * l).exp()).collect();
    let pre = C64::from_polar(1.0, 0.75 * PI * (n as f64 - 1.0)) / ((n as f64).sqrt() * (2.0 * PI).powf(h));
    let mut out = Vec::with_capacity(n);
    for l in 0..n {
        let others: Vec<C64> = (0..n).filter(|&k| k != l).map(|k| x[k]).collect();
        let sigma = elementary_symmetric(&others);
        let phase = (C64::new(0.0, PI) * (0.5 * n as f64 + a as f64 - 2.0) * lam[l]).exp();
        let mut value = C64::new(0.0, 0.0);
        let mut err = 0.0;
        for (j, (c, v)) in second.iter().enumerate() {
            let k = c * sigma[n - 1 - j] * pre * phase;
            value += k * v.value;
            err += k.norm() * v.error_estimate;
        }
        out.push(EvalResult { value, error_estimate: err + f64::EPSILON * value.norm(), method: Method::Asymptotic });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical;
    use crate::series;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn rel(a: C64, b: C64) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn rank_two_k_bessel() {
        let lam = c(0.2, 0.1);
        let idx = SpectralIndex::new(vec![lam, -lam]).unwrap();
        for x in [12.0, 30.0] {
            let v = second_kind(&SurfacePoint::real(x), &idx, &RootOfUnity::new(2, 1), DEFAULT_THETA, 30).unwrap();
            let want = 2.0 / PI.sqrt() * classical::bessel_k(2.0 * lam, c(2.0 * x, 0.0)).unwrap();
            assert!(rel(v.value, want) < 1e-13, "x={x}");
            assert!(v.error_estimate < 1e-13 * want.norm());
        }
    }

    #[test]
    fn rank_two_hankel() {
        // H⁺(x;λ,−λ) = πi e^{πiλ} H^{(1)}_{2λ}(2x)
        let lam = c(0.0, 0.2);
        let idx = SpectralIndex::new(vec![lam, -lam]).unwrap();
        let x = 30.0;
        let v = h_bessel(&SurfacePoint::real(x), &idx, 1).unwrap();
        let want = c(0.0, PI) * (c(0.0, PI) * lam).exp() * classical::hankel1(2.0 * lam, c(2.0 * x, 0.0)).unwrap();
        assert!(rel(v.value, want) < 1e-9);
    }

    #[test]
    fn leading_term_normalization() {
        let idx = SpectralIndex::from_real(&[0.3, -0.1, -0.2]).unwrap();
        let xi = RootOfUnity::one(3);
        // along arg z = arg(i ξ̄) = π/2
        let z = SurfacePoint::new(100.0, PI / 2.0);
        let v = second_kind(&z, &idx, &xi, DEFAULT_THETA, 30).unwrap();
        let lead = (C64::new(0.0, 3.0) * z.to_complex()).exp() * z.pow(c(-1.0, 0.0));
        assert!((v.value / lead - 1.0).norm() < 0.01);
    }

    #[test]
    fn sector_and_floor_are_enforced() {
        let idx = SpectralIndex::from_real(&[0.3, -0.1, -0.2]).unwrap();
        let xi = RootOfUnity::one(3);
        let far = SurfacePoint::new(30.0, PI / 2.0 + sector_limit(3, DEFAULT_THETA) + 0.01);
        assert!(matches!(second_kind(&far, &idx, &xi, DEFAULT_THETA, 30), Err(Error::OutOfSector { .. })));
        let near = SurfacePoint::real(2.0);
        assert!(matches!(second_kind(&near, &idx, &xi, DEFAULT_THETA, 30), Err(Error::BelowFloor { .. })));
    }

    #[test]
    fn matches_series_in_every_direction() {
        let idx = SpectralIndex::new(vec![c(0.3, 0.1), c(-0.1, 0.0), c(-0.2, -0.1)]).unwrap();
        let mut checked = 0;
        for k in -2..=4 {
            let xi = RootOfUnity::new(3, k);
            for arg in [-0.5, 0.0, 0.9] {
                let z = SurfacePoint::new(25.0, arg);
                let Ok(a) = second_kind(&z, &idx, &xi, DEFAULT_THETA, 30) else { continue };
                let s = series::second_kind_series(&z, &idx, &xi, 1e-14).unwrap();
                let d = (a.value - s.value).norm();
                assert!(d < 1e-10 * s.value.norm(), "k={k} arg={arg}: {d:e}");
                assert!(d <= 4.0 * a.error_estimate + 1e-13 * s.value.norm());
                checked += 1;
            }
        }
        assert!(checked >= 15, "only {checked} points inside their sectors");
    }

    #[test]
    fn rotation_law() {
        let idx = SpectralIndex::new(vec![c(0.2, 0.05), c(0.1, -0.1), c(-0.05, 0.0), c(-0.25, 0.05)]).unwrap();
        let z = SurfacePoint::real(30.0);
        let xi = RootOfUnity::new(4, 1);
        let direct = second_kind(&z, &idx, &xi, DEFAULT_THETA, 30).unwrap();
        let rotated = rotate_second_kind(&z, &idx, &xi).unwrap();
        assert!(rel(rotated.value, direct.value) < 1e-10);
        // ξ = −1: J(z;λ;−1) = (−1)^{(n−1)/2} J(−z;λ;1)
        let m1 = RootOfUnity::minus_one(4);
        let a = second_kind(&SurfacePoint::new(30.0, 0.3), &idx, &m1, DEFAULT_THETA, 30).unwrap();
        let b = rotate_second_kind(&SurfacePoint::new(30.0, 0.3), &idx, &m1).unwrap();
        let b2 = rotate_second_kind_via(&SurfacePoint::new(30.0, 0.3), &idx, &m1, -1).unwrap();
        assert!(rel(b.value, a.value) < 1e-10);
        assert!(rel(b2.value, a.value) < 1e-10);
    }

    #[test]
    fn varsigma_expansion_matches_series() {
        let idx = SpectralIndex::from_real(&[0.3, -0.1, -0.2]).unwrap();
        for s in SignVector::all(3) {
            let z = SurfacePoint::real(25.0);
            let a = j_varsigma_asymptotic(&z, &s, &idx).unwrap();
            let b = series::j_function(&z, &s, &idx, 1e-14).unwrap();
            assert!(rel(a.value, b.value) < 1e-7, "s={s}");
        }
    }

    #[test]
    fn bridge_is_exact() {
        let idx = SpectralIndex::from_real(&[0.3, -0.1, -0.2]).unwrap();
        let z = SurfacePoint::real(40.0);
        for sign in [1i8, -1] {
            let j = j_varsigma_asymptotic(&z, &SignVector::all_equal(3, sign), &idx).unwrap();
            let w = j.value * 3f64.sqrt() / two_pi_i_pow(3, sign);
            let direct = second_kind(&z, &idx, &unit_root(3, sign), DEFAULT_THETA, DEFAULT_M_CAP).unwrap();
            assert!(rel(w, direct.value) < 1e-14);
        }
    }

    #[test]
    fn w_derivatives_match_differences() {
        let idx = SpectralIndex::from_real(&[0.3, -0.1, -0.2]).unwrap();
        let x = 30.0;
        let w = w_function(&SurfacePoint::real(x), &idx, 1, 2).unwrap();
        let f = |t: f64| w_function(&SurfacePoint::real(t), &idx, 1, 0).unwrap()[0].value;
        let h = 1e-3;
        assert!(rel(w[1].value, (f(x + h) - f(x - h)) / (2.0 * h)) < 1e-6);
        assert!(rel(w[2].value, (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)) < 1e-4);
        // leading behaviour x^{−(n−1)/2}
        assert!((w[0].value * x - 1.0).norm() < 0.05);
    }

    #[test]
    fn vandermonde_inverse_is_inverse() {
        let x: Vec<C64> = [0.3, -0.17, 0.41, 0.05, -0.33].iter().map(|l| (c(0.0, -2.0 * PI) * *l).exp()).collect();
        let inv = vandermonde_inverse(&x).unwrap();
        let n = x.len();
        for m in 0..n {
            for l in 0..n {
                let s: C64 = (0..n).map(|j| inv[m][j] * x[l].powu(j as u32)).sum();
                let want = if m == l { 1.0 } else { 0.0 };
                assert!((s - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn inverse_connection_rank_two() {
        // J_2(z;+,λ,−λ) = J_{2λ}(2z), J_1 = J_{−2λ}(2z)
        let lam = c(0.15, 0.1);
        let idx = SpectralIndex::new(vec![lam, -lam]).unwrap();
        let x = 30.0;
        let v = inverse_connection(&SurfacePoint::real(x), &idx, 0).unwrap();
        assert!(rel(v[1].value, classical::bessel_j(2.0 * lam, c(2.0 * x, 0.0))) < 1e-10);
        assert!(rel(v[0].value, classical::bessel_j(-2.0 * lam, c(2.0 * x, 0.0))) < 1e-10);
    }

    #[test]
    fn inverse_connection_rank_three() {
        let idx = SpectralIndex::new(vec![c(0.3, 0.1), c(-0.1, 0.0), c(-0.2, -0.1)]).unwrap();
        let z = SurfacePoint::real(60.0);
        // a = −1 rather than 1 keeps every ξ_j's sector around ℝ₊
        for a in [0, -1] {
            let v = inverse_connection(&z, &idx, a).unwrap();
            let sign = if a == 0 { 1 } else { -1 };
            for l in 1..=3 {
                let s = series::first_kind(&z, sign, &idx, l, 1e-14).unwrap();
                assert!(rel(v[l - 1].value, s.value) < 1e-6, "a={a} l={l}");
            }
        }
    }
}
