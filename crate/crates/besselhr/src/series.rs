//! Bessel functions of the first kind by their ascending series, and
//! J(z;ς,λ) through the residue (connection) formula
//!
//! J(z;ς,λ) = Σ_l E E_l ∏_{k≠l} Γ(λ_l−λ_k) · z^{−nλ_l} Σ_m w^m / ∏_k (1+λ_k−λ_l)_m,
//!
//! with w = (−1)^{n₋} i^n z^n, E = e^{−πiΣς_kλ_k/2}, E_l = e^{πi(n₊−n₋)λ_l/2}.
//!
//! The n series are individually of size e^{n|z|} while their combination can
//! be as small as e^{−n|z|}, so everything is summed in multiprecision at a
//! working precision that is raised until the measured cancellation leaves
//! full double accuracy.

use std::collections::HashMap;
use std::f64::consts::{LN_2, PI};
use std::sync::{Arc, Mutex, OnceLock};

use crate::coeffs::{big_lambda, NumericUv};
use crate::error::{Error, Result};
use crate::index::{lambda_of_nu, RootOfUnity, SignVector, SpectralIndex, SurfacePoint, C64};
use crate::mp::{self, Mp};
use crate::{EvalResult, Method};

/// Below this genericity gap the connection formula is replaced by its limit.
pub const GENERICITY_EPS: f64 = 1e-4;
/// Radius and number of nodes of the Cauchy mean used for that limit.
pub const CAUCHY_RADIUS: f64 = 1e-3;
pub const CAUCHY_NODES: usize = 8;

const MAX_BITS: usize = 1 << 18;

/// A value of an ascending series with its truncation data.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesEval {
    pub value: C64,
    pub terms_used: usize,
    /// Bound on the omitted tail, absolute.
    pub tail_bound: f64,
    /// Total absolute error estimate: tail plus rounding amplified by
    /// cancellation.
    pub error_estimate: f64,
    /// Working precision of the final attempt.
    pub bits: usize,
}

impl SeriesEval {
    pub fn to_result(&self) -> EvalResult {
        EvalResult { value: self.value, error_estimate: self.error_estimate, method: Method::Series }
    }
}

/// log₂ of |x| for an Mp value, −∞ for zero.
fn log2_abs(x: &Mp) -> f64 {
    if x.is_zero() {
        f64::NEG_INFINITY
    } else {
        let m = x.abs_f64();
        if m.is_finite() && m > 0.0 {
            m.log2()
        } else {
            x.log2_abs() as f64
        }
    }
}

fn i_pow(k: usize) -> (f64, f64) {
    match k % 4 {
        0 => (1.0, 0.0),
        1 => (0.0, 1.0),
        2 => (-1.0, 0.0),
        _ => (0.0, -1.0),
    }
}

/// w = sign · iⁿ · zⁿ at precision p, and log z.
fn series_variable(z: &SurfacePoint, sign: i8, n: usize, p: usize) -> (Mp, Mp) {
    let lnz = Mp::from_c64(z.ln(), p);
    let mut w = lnz.mul_f64(n as f64).exp();
    let (re, im) = i_pow(n);
    if im != 0.0 {
        w = w.mul_i();
    }
    if (re + im) * (sign as f64) < 0.0 {
        w = w.neg();
    }
    (w, lnz)
}

struct PartialSum {
    sum: Mp,
    max_log2: f64,
    terms: usize,
    tail: f64,
}

/// Σ_{m≥m0} term_m with term_m = w^m z^{−nλ_l} ∏_k 1/Γ(1+λ_k−λ_l+m).
///
/// With `lead = Some(g)` (generic index only) the m = 0 coefficient is g
/// instead, which rescales the whole series. Every quantity derived from λ is
/// formed in multiprecision: a rounding of λ_k − λ_l in double precision would
/// be amplified by the cancellation between the series.
fn sum_first_kind(w: &Mp, lnz: &Mp, lam: &[C64], l: usize, p: usize, lead: Option<&Mp>) -> PartialSum {
    let n = lam.len();
    let lam_mp: Vec<Mp> = lam.iter().map(|x| Mp::from_c64(*x, p)).collect();
    let dm: Vec<Mp> = lam_mp.iter().map(|x| x.sub(&lam_mp[l])).collect();
    let diffs: Vec<C64> = dm.iter().map(Mp::to_c64).collect();
    // terms with 1+λ_k−λ_l+m ≤ 0 vanish
    let m0 = diffs
        .iter()
        .filter(|d| d.im == 0.0 && d.re == d.re.round() && d.re <= -1.0)
        .map(|d| (-d.re) as usize)
        .max()
        .unwrap_or(0);
    let zpow = lnz.mul(&lam_mp[l]).mul_f64(-(n as f64)).exp();
    let mut term = match (lead, m0) {
        (Some(g), 0) => zpow.mul(g),
        _ => {
            let mut t = zpow.mul(&w.powi(m0 as u32));
            for d in &dm {
                t = t.mul(&mp::recip_gamma(&d.add_f64(1.0 + m0 as f64)));
            }
            t
        }
    };
    let mut sum = term.clone();
    let mut max_log2 = log2_abs(&term);
    let wabs = w.abs_f64();
    let zabs = wabs.powf(1.0 / n as f64);
    let lam_max = lam.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let m_min = zabs + 2.0 * lam_max + 2.0;
    let mut m = m0;
    let tail;
    loop {
        m += 1;
        let mut den = Mp::from_int(m as i64, p);
        for (k, d) in dm.iter().enumerate() {
            if k != l {
                den = den.mul(&d.add_f64(m as f64));
            }
        }
        term = term.mul(w).div(&den);
        sum = sum.add(&term);
        let tl = log2_abs(&term);
        max_log2 = max_log2.max(tl);
        if m as f64 > m_min && tl < max_log2 - p as f64 - 4.0 {
            // ratio of the next term; the ratios decrease from here on
            let next: f64 = diffs.iter().map(|d| (d + (m + 1) as f64).norm()).product();
            let q = wabs / next;
            if q < 0.5 {
                tail = 2f64.powf(tl) * q / (1.0 - q);
                break;
            }
        }
        if m > 1_000_000 {
            tail = f64::INFINITY;
            break;
        }
    }
    PartialSum { sum, max_log2, terms: m - m0 + 1, tail }
}

/// Bits needed to see |z| without cancellation for a rank-n series.
fn initial_bits(n: usize, z: &SurfacePoint) -> usize {
    let r = z.modulus();
    let want = 64.0 + 2.0 * n as f64 * r / LN_2 + 8.0 * n as f64;
    ((want / 64.0).ceil() * 64.0) as usize
}

/// J_l(z;sign,λ) = Σ_m (sign·iⁿ)^m z^{n(m−λ_l)} / ∏_k Γ(λ_k−λ_l+m+1), l 1-based.
pub fn first_kind(z: &SurfacePoint, sign: i8, lambda: &SpectralIndex, l: usize, tol: f64) -> Result<SeriesEval> {
    let n = lambda.rank();
    if l == 0 || l > n {
        return Err(Error::Invalid(format!("first-kind index {l} out of range 1..={n}")));
    }
    let mut p = initial_bits(n, z) / 2 + 64;
    loop {
        let (w, lnz) = series_variable(z, sign, n, p);
        let s = sum_first_kind(&w, &lnz, lambda.lambda(), l - 1, p, None);
        let value = s.sum.to_c64();
        let vlog = log2_abs(&s.sum);
        let lost = (s.max_log2 - vlog).max(0.0);
        let rounding = 2f64.powf(s.max_log2 - p as f64) * s.terms as f64;
        let err = rounding + s.tail + value.norm() * f64::EPSILON;
        if !value.re.is_finite() || !value.im.is_finite() {
            return Err(Error::Overflow { modulus: z.modulus() });
        }
        if err <= tol.max(4.0 * f64::EPSILON) * value.norm() || p as f64 > lost + 200.0 || vlog == f64::NEG_INFINITY {
            return Ok(SeriesEval { value, terms_used: s.terms, tail_bound: s.tail, error_estimate: err, bits: p });
        }
        p = ((lost as usize + 128) / 64 + 1) * 64;
        if p > MAX_BITS {
            return Err(Error::Overflow { modulus: z.modulus() });
        }
    }
}

/// Per-index multiprecision constants of the connection formula.
struct Plan {
    /// ∏_{k≠l} Γ(λ_l−λ_k)
    gammas: Vec<Mp>,
}

type PlanKey = (Vec<u64>, usize);

fn plan_cache() -> &'static Mutex<HashMap<PlanKey, Arc<Plan>>> {
    static CACHE: OnceLock<Mutex<HashMap<PlanKey, Arc<Plan>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn plan_for(lam: &[C64], p: usize) -> Arc<Plan> {
    let key: PlanKey = (lam.iter().flat_map(|c| [c.re.to_bits(), c.im.to_bits()]).collect(), p);
    if let Some(plan) = plan_cache().lock().expect("plan cache").get(&key) {
        return plan.clone();
    }
    let n = lam.len();
    let mut gammas = Vec::with_capacity(n);
    for l in 0..n {
        let mut g = Mp::one(p);
        let ll = Mp::from_c64(lam[l], p);
        for k in 0..n {
            if k != l {
                g = g.mul(&mp::gamma(&ll.sub(&Mp::from_c64(lam[k], p))));
            }
        }
        gammas.push(g);
    }
    let plan = Arc::new(Plan { gammas });
    let mut cache = plan_cache().lock().expect("plan cache");
    if cache.len() > 4096 {
        cache.clear();
    }
    cache.insert(key, plan.clone());
    plan
}

struct Connection {
    value: Mp,
    /// log₂ of the largest partial quantity, for the cancellation estimate
    scale_log2: f64,
    tail: f64,
    terms: usize,
}

/// What the connection sum assembles from the first-kind series.
#[derive(Clone, Copy)]
enum Target<'a> {
    /// J(z;ς,λ)
    Varsigma(&'a SignVector),
    /// J(z;λ;ξ) without its constant prefactor √n(−πiξ/2)^{(n−1)/2}π^{1−n}
    SecondKind(&'a RootOfUnity),
}

impl Target<'_> {
    fn series_sign(&self) -> i8 {
        match self {
            Target::Varsigma(s) => s.product(),
            Target::SecondKind(xi) => xi.nth_power_sign(),
        }
    }

    /// Initial guess for the extra bits per unit n|z| lost to decay.
    fn decay(&self, z: &SurfacePoint) -> f64 {
        match self {
            Target::Varsigma(s) if !s.is_constant() => s.decay_rate(),
            Target::Varsigma(_) => 0.0,
            Target::SecondKind(xi) => (xi.argument() + z.argument).sin().max(0.0),
        }
    }
}

fn connection_sum(z: &SurfacePoint, target: Target<'_>, lam: &[C64], p: usize) -> Connection {
    let n = lam.len();
    let (w, lnz) = series_variable(z, target.series_sign(), n, p);
    let plan = plan_for(lam, p);
    let pi = Mp::from_parts(mp::pi(p), mp::bf(0.0, p), p);
    let lam_mp: Vec<Mp> = lam.iter().map(|x| Mp::from_c64(*x, p)).collect();
    // per-l phase: exponent_l = a·λ_l + b
    let (a, b) = match target {
        Target::Varsigma(signs) => {
            // E·E_l = exp(πi/2 · ((n₊−n₋)λ_l − Σς_kλ_k))
            let mut sum_sl = Mp::zero(p);
            for (&s, x) in signs.signs().iter().zip(&lam_mp) {
                sum_sl = if s > 0 { sum_sl.add(x) } else { sum_sl.sub(x) };
            }
            let half_pi_i = pi.mul_f64(0.5).mul_i();
            let diff = signs.n_plus() as f64 - signs.n_minus() as f64;
            (half_pi_i.mul_f64(diff), sum_sl.neg().mul(&half_pi_i))
        }
        Target::SecondKind(xi) => {
            // (iξ̄)^{nλ_l} = exp(i n λ_l (π/2 − arg ξ)), arg ξ = πk/n
            let k = xi.index() as f64;
            let arg = pi.mul_f64(0.5 * n as f64 - k).mul_i();
            (arg, Mp::zero(p))
        }
    };
    let one = Mp::one(p);
    let mut total = Mp::zero(p);
    let mut scale_log2 = f64::NEG_INFINITY;
    let mut tail = 0.0;
    let mut terms = 0;
    for l in 0..n {
        let e = lam_mp[l].mul(&a).add(&b).exp();
        let coef = e.mul(&plan.gammas[l]);
        // the Pochhammer-normalized series: leading coefficient 1
        let s = sum_first_kind(&w, &lnz, lam, l, p, Some(&one));
        let clog = log2_abs(&coef);
        scale_log2 = scale_log2.max(clog + s.max_log2);
        tail += 2f64.powf(clog) * s.tail;
        terms = terms.max(s.terms);
        total = total.add(&coef.mul(&s.sum));
    }
    Connection { value: total, scale_log2, tail, terms }
}

fn genericity_gap(lam: &[C64]) -> f64 {
    let mut gap = f64::INFINITY;
    for (l, a) in lam.iter().enumerate() {
        for b in &lam[l + 1..] {
            let d = a - b;
            gap = gap.min(C64::new(d.re - d.re.round(), d.im).norm());
        }
    }
    gap
}

/// Genericity gap below which the double-precision path is not tried.
const FAST_GAP: f64 = 1e-2;

/// The connection sum in double precision, when its error estimate (rounding
/// amplified by cancellation and by the conditioning of the Γ(λ_l−λ_k) in λ)
/// meets `tol`. Saves the multiprecision setup for small, benign arguments.
fn fast_connection(z: &SurfacePoint, target: Target<'_>, lam: &[C64], tol: f64) -> Option<SeriesEval> {
    let n = lam.len();
    let eps = f64::EPSILON;
    let lnz = z.ln();
    let zabs = z.modulus();
    if n as f64 * zabs > 30.0 {
        return None;
    }
    let (re, im) = i_pow(n);
    let w = (lnz * n as f64).exp() * C64::new(re, im) * target.series_sign() as f64;
    let (a, b) = match target {
        Target::Varsigma(signs) => {
            let sum: C64 = signs.signs().iter().zip(lam).map(|(&s, &x)| s as f64 * x).sum();
            let diff = signs.n_plus() as f64 - signs.n_minus() as f64;
            (C64::new(0.0, PI / 2.0 * diff), -C64::new(0.0, PI / 2.0) * sum)
        }
        Target::SecondKind(xi) => (C64::new(0.0, PI * (0.5 * n as f64 - xi.index() as f64)), C64::new(0.0, 0.0)),
    };
    let lam_max = lam.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let m_min = zabs + 2.0 * lam_max + 2.0;
    // Pochhammer factors (λ_k−λ_l+m) come as close to 0 as the gap
    let poch_sens = n as f64 / genericity_gap(lam);
    let mut total = C64::new(0.0, 0.0);
    let mut scale: f64 = 0.0;
    let mut cond: f64 = 0.0;
    let mut tail = 0.0;
    let mut terms = 0;
    for l in 0..n {
        let mut coef = (a * lam[l] + b).exp();
        let mut lam_sens = n as f64 * lnz.norm() + PI * n as f64 + poch_sens;
        for k in 0..n {
            if k != l {
                let d = lam[l] - lam[k];
                let lg = crate::gamma::log_gamma(d).ok()?;
                coef *= lg.exp();
                lam_sens += 1.0 / d.norm() + (2.0 + d.norm()).ln() + 1.0;
                cond += 16.0 * eps * (1.0 + lg.norm());
            }
        }
        let zl = (-(n as f64) * lam[l] * lnz).exp();
        let mut term = C64::new(1.0, 0.0);
        let mut sum = term;
        let mut max = 1.0f64;
        let mut m = 0usize;
        let t = loop {
            m += 1;
            let mut den = C64::new(m as f64, 0.0);
            for k in 0..n {
                if k != l {
                    let d = lam[k] - lam[l] + m as f64;
                    den *= d;
                }
            }
            term = term * w / den;
            sum += term;
            max = max.max(term.norm());
            if m as f64 > m_min && term.norm() < eps * eps * max {
                let next: f64 = (0..n).map(|k| (lam[k] - lam[l] + (m + 1) as f64).norm()).product();
                let q = w.norm() / next;
                if q < 0.5 {
                    break term.norm() * q / (1.0 - q);
                }
            }
            if m > 10_000 {
                return None;
            }
        };
        let c = coef * zl;
        if !c.re.is_finite() || !c.im.is_finite() {
            return None;
        }
        scale = scale.max(c.norm() * max);
        cond += eps * lam_max * lam_sens;
        tail += c.norm() * t;
        terms = terms.max(m);
        total += c * sum;
    }
    let err = scale * (cond + 8.0 * eps * (terms + n) as f64) + tail + total.norm() * eps;
    if !(err <= tol.max(4.0 * eps) * total.norm()) {
        return None;
    }
    Some(SeriesEval { value: total, terms_used: terms, tail_bound: tail, error_estimate: err, bits: 53 })
}

fn generic_connection(z: &SurfacePoint, target: Target<'_>, lam: &[C64], tol: f64) -> Result<SeriesEval> {
    let n = lam.len();
    if genericity_gap(lam) >= FAST_GAP {
        if let Some(e) = fast_connection(z, target, lam, tol) {
            return Ok(e);
        }
    }
    let mut p = initial_bits(n, z);
    p += ((target.decay(z) * n as f64 * z.modulus() / LN_2) as usize).div_ceil(64) * 64;
    loop {
        let c = connection_sum(z, target, lam, p);
        let value = c.value.to_c64();
        if !value.re.is_finite() || !value.im.is_finite() {
            return Err(Error::Overflow { modulus: z.modulus() });
        }
        let vlog = log2_abs(&c.value);
        let lost = (c.scale_log2 - vlog).max(0.0);
        let rounding = 2f64.powf(c.scale_log2 - p as f64) * (c.terms * n) as f64;
        let err = rounding + c.tail + value.norm() * f64::EPSILON;
        let target_err = tol.max(4.0 * f64::EPSILON) * value.norm();
        if err <= target_err || p >= MAX_BITS {
            return Ok(SeriesEval { value, terms_used: c.terms, tail_bound: c.tail, error_estimate: err, bits: p });
        }
        if vlog == f64::NEG_INFINITY {
            p *= 2;
        } else {
            p = ((lost as usize + 128) / 64 + 1) * 64;
        }
        if p > MAX_BITS {
            return Err(Error::Tolerance { tol, achieved: err / value.norm() });
        }
    }
}

/// Direction u_l = l − (n+1)/2 scaled to max|u_l| = 1; it separates every pair.
fn separating_direction(n: usize) -> Vec<C64> {
    let half = (n as f64 - 1.0) / 2.0;
    (1..=n).map(|l| C64::new((l as f64 - (n as f64 + 1.0) / 2.0) / half.max(1.0), 0.0)).collect()
}

/// Evaluates `target` at λ, or for a non-generic λ the mean over a small
/// circle of generic indices around it.
fn connection_or_limit(z: &SurfacePoint, target: Target<'_>, lambda: &SpectralIndex, tol: f64) -> Result<SeriesEval> {
    let n = lambda.rank();
    if lambda.genericity_gap() >= GENERICITY_EPS {
        return generic_connection(z, target, lambda.lambda(), tol);
    }
    let u = separating_direction(n);
    let q = CAUCHY_NODES;
    let mut means = [C64::new(0.0, 0.0); 2];
    let mut err: f64 = 0.0;
    let mut terms = 0;
    let mut tail = 0.0;
    let mut bits = 0;
    for j in 0..q {
        let theta = PI * (2 * j + 1) as f64 / q as f64;
        let t = C64::from_polar(CAUCHY_RADIUS, theta);
        let pert = lambda.perturbed(&u, t);
        let e = generic_connection(z, target, pert.lambda(), tol)?;
        means[0] += e.value / q as f64;
        if j % 2 == 0 {
            means[1] += e.value / (q / 2) as f64;
        }
        err = err.max(e.error_estimate);
        terms = terms.max(e.terms_used);
        tail += e.tail_bound / q as f64;
        bits = bits.max(e.bits);
    }
    // the half rule is exact through order q/2 − 1; its discrepancy squared
    // estimates the order-q remainder of the full rule
    let d = (means[0] - means[1]).norm();
    let limit_err = d * (d / means[0].norm().max(f64::MIN_POSITIVE)).min(1.0);
    Ok(SeriesEval { value: means[0], terms_used: terms, tail_bound: tail, error_estimate: err + limit_err, bits })
}

/// J(z;ς,λ) from the first-kind series.
pub fn j_function(z: &SurfacePoint, signs: &SignVector, lambda: &SpectralIndex, tol: f64) -> Result<SeriesEval> {
    if signs.rank() != lambda.rank() {
        return Err(Error::Invalid(format!(
            "sign vector has length {} but the index has rank {}",
            signs.rank(),
            lambda.rank()
        )));
    }
    connection_or_limit(z, Target::Varsigma(signs), lambda, tol)
}

/// The second-kind function J(z;λ;ξ) from the first-kind series,
///
/// J(z;λ;ξ) = √n (−πiξ/2)^{(n−1)/2} Σ_l (iξ̄)^{nλ_l} S_l(λ) J_l(z;ξⁿ,λ),
///
/// valid on the whole cover (no sector restriction), with the designated
/// arguments of z and ξ.
pub fn second_kind_series(z: &SurfacePoint, lambda: &SpectralIndex, xi: &RootOfUnity, tol: f64) -> Result<SeriesEval> {
    let n = lambda.rank();
    if xi.rank() != n {
        return Err(Error::Invalid(format!("root of unity of rank {} for an index of rank {n}", xi.rank())));
    }
    let mut e = connection_or_limit(z, Target::SecondKind(xi), lambda, tol)?;
    // √n (π/2)^{(n−1)/2} e^{(n−1)/2·(−πi/2 + i arg ξ)} / π^{n−1}
    let h = (n as f64 - 1.0) / 2.0;
    let pre = (n as f64).sqrt() * (PI / 2.0).powf(h) / PI.powi(n as i32 - 1)
        * C64::from_polar(1.0, h * (xi.argument() - PI / 2.0));
    e.value *= pre;
    e.tail_bound *= pre.norm();
    e.error_estimate *= pre.norm();
    Ok(e)
}

/// J^{(k)}(x;ς,λ) for k = 0..=k_max through the index-shift formula
/// J^{(k)} = Σ_j S_j(ς)(in)^j U_{k,j} x^{j−k} J_{ν+e^{d−j+1}}, where S_j is the
/// product of the last j signs and U is instantiated at Λ_m = nλ_{n−m}.
pub fn derivatives(
    z: &SurfacePoint,
    signs: &SignVector,
    lambda: &SpectralIndex,
    k_max: usize,
    tol: f64,
) -> Result<Vec<C64>> {
    let n = lambda.rank();
    if k_max > n {
        return Err(Error::Invalid(format!("derivative order {k_max} exceeds the rank {n}")));
    }
    let d = n - 1;
    let nu = lambda.nu();
    let uv = NumericUv::build(&big_lambda(lambda));
    // shifted[j] = J_{ν+e^{d−j+1}}; j = 0 and j = n both give J_ν itself
    let base = j_function(z, signs, lambda, tol)?.value;
    let mut shifted = vec![base; k_max + 1];
    for (j, slot) in shifted.iter_mut().enumerate().take(k_max.min(d) + 1).skip(1) {
        let lam = lambda_of_nu(&nu.shifted_leading(d - j + 1));
        *slot = j_function(z, signs, &lam, tol)?.value;
    }
    let zc = z.to_complex();
    let s = signs.signs();
    let mut out = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let mut acc = C64::new(0.0, 0.0);
        let mut sj = 1.0;
        let mut inj = C64::new(1.0, 0.0);
        for j in 0..=k {
            if j > 0 {
                sj *= s[n - j] as f64;
                inj *= C64::new(0.0, n as f64);
            }
            acc += sj * inj * uv.u[k][j] * zc.powi(j as i32 - k as i32) * shifted[j];
        }
        out.push(acc);
    }
    Ok(out)
}

/// Σ_j V_{n,j} x^j J^{(j)} + (V_{n,0} − S_n(ς)(in)^n x^n) J, and the sum of the
/// magnitudes of its terms.
pub fn ode_residual(z: &SurfacePoint, signs: &SignVector, lambda: &SpectralIndex, tol: f64) -> Result<(C64, f64)> {
    let n = lambda.rank();
    let der = derivatives(z, signs, lambda, n, tol)?;
    let v = crate::coeffs::bessel_eq_coeffs(lambda).v;
    let zc = z.to_complex();
    let mut res = C64::new(0.0, 0.0);
    let mut scale = 0.0;
    for j in 0..=n {
        let t = v[j] * zc.powi(j as i32) * der[j];
        res += t;
        scale += t.norm();
    }
    let in_n = C64::new(0.0, n as f64).powi(n as i32);
    let t = signs.product() as f64 * in_n * zc.powi(n as i32) * der[0];
    res -= t;
    scale += t.norm();
    Ok((res, scale))
}

/// c(ς) = e(−(n−1)/8 − n₊/(2n) + (1/2n)Σ_{l∈L₊} l), the constant in the
/// elementary closed form at the index λ_l = ((n+1)/2 − l)/n.
pub fn prototype_constant(signs: &SignVector) -> C64 {
    let n = signs.rank() as f64;
    let sum_l: usize = signs.positions(1).iter().sum();
    let t = -(n - 1.0) / 8.0 - signs.n_plus() as f64 / (2.0 * n) + sum_l as f64 / (2.0 * n);
    C64::from_polar(1.0, 2.0 * PI * t)
}

/// (c(ς)/√n)(2π/x)^{(n−1)/2} e^{inξ(ς)x}.
pub fn prototype_closed_form(x: f64, signs: &SignVector) -> C64 {
    let n = signs.rank() as f64;
    let xi = signs.xi().value();
    prototype_constant(signs) / n.sqrt()
        * (2.0 * PI / x).powf((n - 1.0) / 2.0)
        * (C64::new(0.0, n * x) * xi).exp()
}
