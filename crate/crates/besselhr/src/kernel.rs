//! The Bessel kernel J_(λ,δ)(x) on ℝ^×, its large-x asymptotics and the
//! Hankel transform Υ(x) = ∫ υ(y) J_(λ,δ)(xy) dy.
//!
//! J_(λ,δ)(±x) = Σ_{ς : ∏ς_l = ±} (∏ς_l^{δ_l}) J(2πx^{1/n};ς,λ).

use std::f64::consts::PI;
use std::str::FromStr;

use crate::asympt;
use crate::error::{Error, Result};
use crate::gamma::{log_gamma, recip_gamma};
use crate::index::{RootOfUnity, SignVector, SpectralIndex, SurfacePoint, C64};
use crate::mellinbarnes::mb_kernel;
use crate::quad::{adaptive, gk15, Tolerance};
use crate::series;
use crate::{EvalResult, Method};

/// Above this ratio of Σ|terms| to |sum| the automatic method hands the
/// kernel to the contour integral.
pub const CANCELLATION_SWITCH: f64 = 1e6;

#[derive(Clone, Debug, PartialEq)]
pub struct KernelIndex {
    pub lambda: SpectralIndex,
    pub delta: Vec<u8>,
}

impl KernelIndex {
    pub fn new(lambda: SpectralIndex, delta: Vec<u8>) -> Result<Self> {
        if delta.len() != lambda.rank() {
            return Err(Error::Invalid(format!(
                "parity vector has length {} but the index has rank {}",
                delta.len(),
                lambda.rank()
            )));
        }
        if delta.iter().any(|&d| d > 1) {
            return Err(Error::Invalid(format!("parities must be 0 or 1, got {delta:?}")));
        }
        Ok(KernelIndex { lambda, delta })
    }

    pub fn rank(&self) -> usize {
        self.lambda.rank()
    }

    /// c^±(δ) = (±)^{Σδ_l} e(±(n−1)/8) / √n.
    pub fn c_pm(&self, sign: i8) -> C64 {
        let n = self.rank() as f64;
        let parity = self.delta.iter().map(|&d| d as u32).sum::<u32>();
        let s = if sign < 0 && parity % 2 == 1 { -1.0 } else { 1.0 };
        C64::from_polar(s / n.sqrt(), sign as f64 * 2.0 * PI * (n - 1.0) / 8.0)
    }
}

/// How each J(x;ς,λ) inside the kernel is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelMethod {
    /// Asymptotic expansion where it meets the tolerance, series otherwise,
    /// contour integral when the signed sum cancels badly.
    Auto,
    Fixed(Method),
}

impl FromStr for KernelMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            Ok(KernelMethod::Auto)
        } else {
            Ok(KernelMethod::Fixed(s.parse()?))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelEval {
    pub result: EvalResult,
    /// Σ|terms| / |sum|.
    pub cancellation: f64,
}

/// J(y;ς,λ) for real y > 0 by the named method.
pub fn j_real(y: f64, signs: &SignVector, lambda: &SpectralIndex, method: KernelMethod, tol: f64) -> Result<EvalResult> {
    let z = SurfacePoint::real(y);
    match method {
        KernelMethod::Fixed(Method::Series) => Ok(series::j_function(&z, signs, lambda, tol)?.to_result()),
        KernelMethod::Fixed(Method::Asymptotic) => Ok(asympt::j_varsigma_asymptotic(&z, signs, lambda)?.to_result()),
        KernelMethod::Fixed(Method::MellinBarnes) => {
            Ok(crate::mellinbarnes::mb_eval(y, signs, lambda, tol)?.to_result())
        }
        KernelMethod::Auto => {
            if y >= asympt::validity_floor(lambda) {
                if let Ok(a) = asympt::j_varsigma_asymptotic(&z, signs, lambda) {
                    // K-type values far out underflow together with their error
                    let underflow = a.value.norm() < 1e-290 && a.error_estimate < 1e-290;
                    if a.error_estimate <= tol * a.value.norm() || underflow {
                        return Ok(a.to_result());
                    }
                }
            }
            Ok(series::j_function(&z, signs, lambda, tol)?.to_result())
        }
    }
}

/// J_(λ,δ)(x) for x ≠ 0.
pub fn bessel_kernel(x: f64, idx: &KernelIndex, method: KernelMethod, tol: f64) -> Result<KernelEval> {
    if x == 0.0 || !x.is_finite() {
        return Err(Error::Invalid(format!("the kernel needs a finite x ≠ 0, got {x}")));
    }
    let n = idx.rank();
    if method == KernelMethod::Fixed(Method::MellinBarnes) {
        let m = mb_kernel(x, &idx.lambda, &idx.delta, tol)?;
        return Ok(KernelEval { result: m.to_result(), cancellation: m.abs_integral / m.value.norm() });
    }
    let y = 2.0 * PI * x.abs().powf(1.0 / n as f64);
    let sign = if x > 0.0 { 1 } else { -1 };
    let mut value = C64::new(0.0, 0.0);
    let mut err = 0.0;
    let mut mass = 0.0;
    let mut used = Method::Series;
    for s in SignVector::with_product(n, sign) {
        let r = j_real(y, &s, &idx.lambda, method, tol)?;
        value += s.parity_weight(&idx.delta) * r.value;
        err += r.error_estimate;
        mass += r.value.norm();
        if r.method == Method::Asymptotic {
            used = Method::Asymptotic;
        }
    }
    let cancellation = mass / value.norm();
    if method == KernelMethod::Auto && !(cancellation <= CANCELLATION_SWITCH) {
        let m = mb_kernel(x, &idx.lambda, &idx.delta, tol)?;
        return Ok(KernelEval { result: m.to_result(), cancellation });
    }
    Ok(KernelEval { result: EvalResult { value, error_estimate: err, method: used }, cancellation })
}

/// One oscillatory term c^± e(±nx) W^±_λ(x) of the kernel asymptotics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OscillatoryTerm {
    pub sign: i8,
    pub c: C64,
    /// W^±_λ(x) = x^{−(n−1)/2} Σ_{m<M} B_m(λ;±1)(2πx)^{−m}.
    pub w: C64,
    pub value: C64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KernelAsymptotics {
    pub x: f64,
    pub terms: Vec<OscillatoryTerm>,
    /// Main part of J_(λ,δ)(x^n).
    pub plus: C64,
    /// Main part of J_(λ,δ)(−x^n); zero for even n.
    pub minus: C64,
    /// Size of the exponentially small remainders E^±.
    pub remainder_bound: f64,
}

/// The oscillatory part of J_(λ,δ)(±x^n) with M terms of each W^±_λ.
pub fn kernel_asymptotics(x: f64, idx: &KernelIndex, m_terms: usize) -> Result<KernelAsymptotics> {
    let n = idx.rank();
    let lambda = &idx.lambda;
    let floor = asympt::validity_floor(lambda);
    if !(2.0 * PI * x >= floor) {
        return Err(Error::BelowFloor { modulus: 2.0 * PI * x, floor });
    }
    if m_terms == 0 || m_terms > crate::coeffs::B_MAX_TERMS {
        return Err(Error::Invalid(format!("number of terms must be in 1..={}", crate::coeffs::B_MAX_TERMS)));
    }
    let h = (n as f64 - 1.0) / 2.0;
    let mut terms = Vec::new();
    for sign in [1i8, -1] {
        let xi = if sign > 0 { RootOfUnity::one(n) } else { RootOfUnity::minus_one(n) };
        let table = asympt::b_table(lambda, &xi);
        let zinv = 1.0 / (2.0 * PI * x);
        let mut p = 1.0;
        let mut sum = C64::new(0.0, 0.0);
        for m in 0..m_terms {
            sum += table.get(m) * p;
            p *= zinv;
        }
        let w = sum * x.powf(-h);
        let c = idx.c_pm(sign);
        let phase = C64::from_polar(1.0, sign as f64 * 2.0 * PI * n as f64 * x);
        terms.push(OscillatoryTerm { sign, c, w, value: c * phase * w });
    }
    let (plus, minus) = if n % 2 == 0 {
        (terms[0].value + terms[1].value, C64::new(0.0, 0.0))
    } else {
        (terms[0].value, terms[1].value)
    };
    let im = lambda.max_abs_im();
    let count = 2f64.powi(n as i32 - 1);
    let remainder_bound = if n == 1 {
        0.0
    } else {
        count * (2.0 * PI).powf(h) / (n as f64).sqrt()
            * x.powf(-h)
            * (PI * (n / 2) as f64 * im - 2.0 * PI * n as f64 * (PI / n as f64).sin() * x).exp()
    };
    Ok(KernelAsymptotics { x, terms, plus, minus, remainder_bound })
}

/// G_δ(s) = i^δ π^{1/2−s} Γ((s+δ)/2) / Γ((1−s+δ)/2).
pub fn gamma_factor(s: C64, delta: u8) -> Result<C64> {
    let d = (delta % 2) as f64;
    let num = log_gamma((s + d) / 2.0)?;
    let pre = C64::new(0.0, 1.0).powf(d) * ((0.5 - s) * PI.ln()).exp();
    Ok(pre * num.exp() * recip_gamma((1.0 - s + d) / 2.0))
}

/// The same factor as 2(2π)^{−s}Γ(s)cos(πs/2) or 2i(2π)^{−s}Γ(s)sin(πs/2).
pub fn gamma_factor_alt(s: C64, delta: u8) -> Result<C64> {
    let g = (log_gamma(s)? - s * (2.0 * PI).ln()).exp() * 2.0;
    let a = s * PI / 2.0;
    Ok(if delta % 2 == 0 { g * a.cos() } else { C64::new(0.0, 1.0) * g * a.sin() })
}

/// ∏_l G_{δ_l+δ}(s−λ_l).
pub fn gamma_product(s: C64, idx: &KernelIndex, delta: u8) -> Result<C64> {
    let mut p = C64::new(1.0, 0.0);
    for (&l, &d) in idx.lambda.lambda().iter().zip(&idx.delta) {
        p *= gamma_factor(s - l, d + delta)?;
    }
    Ok(p)
}

#[derive(Clone, Debug, PartialEq)]
pub enum WeightShape {
    /// scale·exp(−(log|y| − μ)²/(2w²)).
    GaussianLog { mu: f64, width: f64, scale: f64 },
    /// Values on y > 0 at y = e^{u_k}, u_k increasing, linearly interpolated
    /// in u and zero outside.
    Samples { u: Vec<f64>, values: Vec<C64> },
}

/// A test function υ on ℝ^× with υ(−y) = (−1)^η υ(y).
#[derive(Clone, Debug, PartialEq)]
pub struct WeightFunction {
    pub shape: WeightShape,
    pub parity: u8,
}

impl WeightFunction {
    pub fn gaussian_log(mu: f64, width: f64, parity: u8) -> Result<Self> {
        if !(width > 0.0) || !mu.is_finite() {
            return Err(Error::Invalid(format!("bad gaussian-log parameters μ={mu}, w={width}")));
        }
        Ok(WeightFunction { shape: WeightShape::GaussianLog { mu, width, scale: 1.0 }, parity: parity % 2 })
    }

    /// A gaussian-log bump at y₀ > 0 with ∫_0^∞ υ = 1.
    pub fn unit_bump(y0: f64, width: f64, parity: u8) -> Result<Self> {
        let mut w = Self::gaussian_log(y0.ln(), width, parity)?;
        let mass = (2.0 * PI).sqrt() * width * (y0.ln() + width * width / 2.0).exp();
        if let WeightShape::GaussianLog { scale, .. } = &mut w.shape {
            *scale = 1.0 / mass;
        }
        Ok(w)
    }

    pub fn samples(u: Vec<f64>, values: Vec<C64>, parity: u8) -> Result<Self> {
        if u.len() != values.len() || u.len() < 2 {
            return Err(Error::Invalid("samples need matching grids of length ≥ 2".into()));
        }
        if u.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Invalid("sample grid must be increasing".into()));
        }
        let peak = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let ends = values[0].norm().max(values[values.len() - 1].norm());
        if ends > 1e-8 * peak {
            return Err(Error::Invalid(format!("samples do not decay at the grid ends ({ends:e} vs peak {peak:e})")));
        }
        Ok(WeightFunction { shape: WeightShape::Samples { u, values }, parity: parity % 2 })
    }

    /// υ(e^u) on the positive half-line.
    pub fn at_log(&self, u: f64) -> C64 {
        match &self.shape {
            WeightShape::GaussianLog { mu, width, scale } => C64::new(scale * (-(u - mu).powi(2) / (2.0 * width * width)).exp(), 0.0),
            WeightShape::Samples { u: grid, values } => {
                if u < grid[0] || u > grid[grid.len() - 1] {
                    return C64::new(0.0, 0.0);
                }
                let k = grid.partition_point(|&g| g <= u).clamp(1, grid.len() - 1);
                let t = (u - grid[k - 1]) / (grid[k] - grid[k - 1]);
                values[k - 1] * (1.0 - t) + values[k] * t
            }
        }
    }

    pub fn eval(&self, y: f64) -> C64 {
        if y == 0.0 {
            return C64::new(0.0, 0.0);
        }
        let v = self.at_log(y.abs().ln());
        if y < 0.0 && self.parity == 1 {
            -v
        } else {
            v
        }
    }

    /// Interval in log|y| outside of which |υ| < eps·max|υ|.
    pub fn log_support(&self, eps: f64) -> (f64, f64) {
        match &self.shape {
            WeightShape::GaussianLog { mu, width, .. } => {
                let r = width * (2.0 * (1.0 / eps).ln()).sqrt();
                (mu - r, mu + r)
            }
            WeightShape::Samples { u, .. } => (u[0], u[u.len() - 1]),
        }
    }

    /// Smallest feature scale in log|y|.
    pub fn resolution(&self) -> f64 {
        match &self.shape {
            WeightShape::GaussianLog { width, .. } => *width,
            WeightShape::Samples { u, .. } => u.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min),
        }
    }

    /// ℳ_δυ(s) in closed form where one exists.
    pub fn mellin_closed_form(&self, delta: u8, s: C64) -> Option<C64> {
        let factor = if (delta + self.parity) % 2 == 0 { 2.0 } else { 0.0 };
        match &self.shape {
            WeightShape::GaussianLog { mu, width, scale } => {
                Some(factor * scale * (2.0 * PI).sqrt() * width * (mu * s + width * width * s * s / 2.0).exp())
            }
            WeightShape::Samples { .. } => None,
        }
    }
}

/// Width used when a weight spec leaves it out.
pub const DEFAULT_WIDTH: f64 = 0.25;

impl FromStr for WeightFunction {
    type Err = Error;
    /// `gaussian-log:η=0,μ=0,w=0.25` (ASCII `eta`, `mu` also accepted; all
    /// parameters optional). Wide bumps make Υ decay slowly, hence the narrow
    /// default.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, params) = s.split_once(':').unwrap_or((s, ""));
        if kind != "gaussian-log" {
            return Err(Error::Invalid(format!("unknown weight {kind:?}; expected gaussian-log")));
        }
        let (mut eta, mut mu, mut w) = (0u8, 0.0, DEFAULT_WIDTH);
        for kv in params.split(',').filter(|p| !p.is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Invalid(format!("weight parameter {kv:?} is not key=value")))?;
            let bad = || Error::Invalid(format!("bad value in weight parameter {kv:?}"));
            match k.trim() {
                "η" | "eta" => eta = v.trim().parse().map_err(|_| bad())?,
                "μ" | "mu" => mu = v.trim().parse().map_err(|_| bad())?,
                "w" | "width" => w = v.trim().parse().map_err(|_| bad())?,
                other => return Err(Error::Invalid(format!("unknown weight parameter {other:?}"))),
            }
        }
        if eta > 1 {
            return Err(Error::Invalid(format!("parity η must be 0 or 1, got {eta}")));
        }
        WeightFunction::gaussian_log(mu, w, eta)
    }
}

/// ℳ_δυ(s) = ∫_{ℝ^×} υ(x) sgn(x)^δ |x|^s d^×x by quadrature in log|x|.
pub fn signed_mellin(v: &WeightFunction, delta: u8, s: C64, tol: f64) -> C64 {
    if (delta + v.parity) % 2 == 1 {
        return C64::new(0.0, 0.0);
    }
    let (a, b) = v.log_support(1e-18);
    let r = adaptive(|u| v.at_log(u) * (s * u).exp(), a, b, Tolerance::new(0.0, tol));
    r.value * 2.0
}

/// υ(x) = Σ_δ sgn(x)^δ/(4πi) ∫_(σ) ℳ_δυ(s)|x|^{−s} ds, with the line
/// truncated at |Im s| ≤ t_max.
pub fn mellin_inverse<F: Fn(u8, C64) -> C64>(m: F, x: f64, sigma: f64, t_max: f64, tol: f64) -> C64 {
    let lx = x.abs().ln();
    let mut total = C64::new(0.0, 0.0);
    for delta in 0..2u8 {
        let r = adaptive(
            |t| {
                let s = C64::new(sigma, t);
                m(delta, s) * (-s * lx).exp()
            },
            -t_max,
            t_max,
            Tolerance::new(0.0, tol),
        );
        let sg = if x < 0.0 && delta == 1 { -1.0 } else { 1.0 };
        // ds = i dt
        total += sg * r.value / (4.0 * PI);
    }
    total
}

/// Υ(x) = ∫_{ℝ^×} υ(y) J_(λ,δ)(xy) dy on a grid, by Gauss–Kronrod panels in
/// u = log|y| whose width follows the local frequency 2π|xy|^{1/n} of the
/// kernel. `tol` is relative to ∫|υ(y) J(xy)| dy.
///
/// The kernel is sampled once into a Chebyshev table over every xy the grid
/// needs; its interpolation error is added to each error estimate.
pub fn hankel_transform(v: &WeightFunction, idx: &KernelIndex, x_grid: &[f64], tol: f64) -> Result<Vec<EvalResult>> {
    if let Some(x) = x_grid.iter().find(|x| **x == 0.0 || !x.is_finite()) {
        return Err(Error::Invalid(format!("the transform is evaluated at x ≠ 0, got {x}")));
    }
    if x_grid.is_empty() {
        return Ok(Vec::new());
    }
    let kernel_tol = (tol * 1e-1).max(1e-14);
    let (a, b) = v.log_support(tol * 1e-3);
    let lx = x_grid.iter().map(|x| x.abs().ln());
    let lo = lx.clone().fold(f64::INFINITY, f64::min) + a - 0.5;
    let hi = lx.fold(f64::NEG_INFINITY, f64::max) + b + 0.5;
    let table = KernelTable::build(lo, hi, kernel_tol, &mut |t| parity_kernel(t, idx, v.parity, kernel_tol))?;
    let mut kernel = |t: f64| table.eval(t.ln());
    x_grid.iter().map(|&x| hankel_point(v, idx.rank(), x, tol, kernel_tol, &mut kernel)).collect()
}

/// K_η(t) = J_(λ,δ)(t) + (−1)^η J_(λ,δ)(−t) for t > 0, so that
/// Υ(x) = ∫_0^∞ υ(y) K_η(xy) dy for x > 0.
fn parity_kernel(t: f64, idx: &KernelIndex, eta: u8, tol: f64) -> Result<C64> {
    let p = bessel_kernel(t, idx, KernelMethod::Auto, tol)?.result.value;
    let q = bessel_kernel(-t, idx, KernelMethod::Auto, tol)?.result.value;
    Ok(if eta == 1 { p - q } else { p + q })
}

/// `kernel_err` is the kernel's own relative error, charged against ∫|υK|.
fn hankel_point<K: FnMut(f64) -> Result<C64>>(
    v: &WeightFunction,
    n: usize,
    x: f64,
    tol: f64,
    kernel_err: f64,
    kernel: &mut K,
) -> Result<EvalResult> {
    if x == 0.0 || !x.is_finite() {
        return Err(Error::Invalid(format!("the transform is evaluated at x ≠ 0, got {x}")));
    }
    // Υ(−x) = (−1)^η Υ(x)
    let flip = if x < 0.0 && v.parity == 1 { -1.0 } else { 1.0 };
    let x = x.abs();
    let n = n as f64;
    let (a, b) = v.log_support(tol * 1e-3);
    let mut failure = None;
    let mut f = |u: f64| -> C64 {
        let y = u.exp();
        let w = v.at_log(u) * y;
        if w.norm() == 0.0 || failure.is_some() {
            return C64::new(0.0, 0.0);
        }
        match kernel(x * y) {
            Ok(k) => w * k,
            Err(e) => {
                failure = Some(e);
                C64::new(0.0, 0.0)
            }
        }
    };
    // seed panels resolve the weight and, where it matters, the kernel; the
    // scale from a first pass then lets negligible stretches stop early
    let mut cuts = vec![a];
    let mut u = a;
    while u < b {
        let freq = 2.0 * PI * (x.abs() * (u + 0.5).exp()).powf(1.0 / n) / n;
        u = (u + (8.0 / freq).min(v.resolution()).max(1e-2)).min(b);
        cuts.push(u);
    }
    let seeds: Vec<_> = cuts.windows(2).map(|w| gk15(&mut f, w[0], w[1])).collect();
    let scale: f64 = seeds.iter().map(|r| r.abs_integral).sum();
    let mut value = C64::new(0.0, 0.0);
    let mut err = 0.0;
    let mut abs = 0.0;
    let budget = 0.25 * tol * scale / seeds.len() as f64;
    for (w, seed) in cuts.windows(2).zip(seeds) {
        let r = if seed.error <= budget {
            seed
        } else {
            adaptive(&mut f, w[0], w[1], Tolerance { abs: budget, rel: 0.0, max_evals: 20_000 })
        };
        value += r.value;
        err += r.error;
        abs += r.abs_integral;
    }
    if let Some(e) = failure {
        return Err(e);
    }
    err += kernel_err * abs;
    if err > tol * abs.max(value.norm()) {
        return Err(Error::Tolerance { tol, achieved: err / abs });
    }
    Ok(EvalResult { value: flip * value, error_estimate: err, method: Method::Series })
}

/// Piecewise Chebyshev interpolant of K_η in log t, each panel split until
/// its trailing coefficients are below `tol` relative to the panel maximum.
struct KernelTable {
    panels: Vec<(f64, f64, Vec<C64>)>,
}

const CHEB_DEGREE: usize = 20;

fn chebyshev_coefficients(values: &[C64]) -> Vec<C64> {
    let m = values.len() - 1;
    (0..=m)
        .map(|k| {
            let mut c = C64::new(0.0, 0.0);
            for (j, f) in values.iter().enumerate() {
                let w = if j == 0 || j == m { 0.5 } else { 1.0 };
                c += w * f * (PI * (j * k) as f64 / m as f64).cos();
            }
            let w = if k == 0 || k == m { 1.0 } else { 2.0 };
            c * w / m as f64
        })
        .collect()
}

impl KernelTable {
    fn build<K: FnMut(f64) -> Result<C64>>(lo: f64, hi: f64, tol: f64, kernel: &mut K) -> Result<Self> {
        let mut panels = Vec::new();
        let mut stack = Vec::new();
        let mut a = lo;
        while a < hi {
            stack.push((a, (a + 1.0).min(hi)));
            a += 1.0;
        }
        stack.reverse();
        while let Some((a, b)) = stack.pop() {
            let m = CHEB_DEGREE;
            let vals: Vec<C64> = (0..=m)
                .map(|j| {
                    let t = (PI * j as f64 / m as f64).cos();
                    kernel((0.5 * (a + b) + 0.5 * (b - a) * t).exp())
                })
                .collect::<Result<_>>()?;
            let c = chebyshev_coefficients(&vals);
            let peak = vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
            let trailing = c[m].norm() + c[m - 1].norm();
            if trailing <= tol * peak || b - a < 1e-3 {
                panels.push((a, b, c));
            } else {
                let mid = 0.5 * (a + b);
                stack.push((mid, b));
                stack.push((a, mid));
            }
        }
        Ok(KernelTable { panels })
    }

    fn eval(&self, log_t: f64) -> Result<C64> {
        let k = self.panels.partition_point(|p| p.1 < log_t);
        let (a, b, c) = self
            .panels
            .get(k)
            .filter(|p| p.0 <= log_t)
            .ok_or_else(|| Error::Invalid(format!("log t = {log_t} outside the kernel table")))?;
        // Clenshaw
        let t = (2.0 * log_t - a - b) / (b - a);
        let (mut b1, mut b2) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        for ck in c.iter().skip(1).rev() {
            let b0 = ck + 2.0 * t * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        Ok(c[0] + t * b1 - b2)
    }
}

/// Both sides of ℳ_δΥ(s) = (∏G_{δ_l+δ}(s−λ_l)) ℳ_δυ(1−s).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FunctionalEquation {
    pub s: C64,
    pub delta: u8,
    pub lhs: C64,
    pub rhs: C64,
}

impl FunctionalEquation {
    pub fn relative_error(&self) -> f64 {
        (self.lhs - self.rhs).norm() / self.rhs.norm()
    }
}

/// Largest log x up to which the functional-equation check waits for Υ to
/// decay; a gaussian-log bump of width w is negligible from about 7w on.
const FE_U_MAX: f64 = 6.0;

/// Checks the functional equation at each s (needs max Re λ < Re s).
///
/// ℳ_δΥ(s) = 2∫ Υ(e^u) e^{us} du is computed by Gauss–Legendre panels in
/// u = log x, with Υ at each node from [`hankel_transform`]. Near 0,
/// Υ(x) ~ Σ C_l x^{−λ_l} fixes the lower cut-off; the upper end is marched
/// until Υ has died out. Only δ = η is nontrivial.
pub fn functional_equation_check(
    v: &WeightFunction,
    idx: &KernelIndex,
    s_values: &[C64],
    tol: f64,
) -> Result<Vec<FunctionalEquation>> {
    let delta = v.parity;
    let max_re = idx.lambda.max_re();
    let sigma_min = s_values.iter().map(|s| s.re).fold(f64::INFINITY, f64::min);
    let sigma_max = s_values.iter().map(|s| s.re).fold(f64::NEG_INFINITY, f64::max);
    if !(max_re < sigma_min) {
        return Err(Error::Invalid(format!("the Mellin transform of Υ needs Re s > max Re λ = {max_re}")));
    }
    let (gx, gw) = crate::quad::gauss_legendre(16);
    let inner_tol = tol.max(1e-13);
    let (va, vb) = v.log_support(inner_tol * 1e-3);
    let ua = -((1.0 / tol).ln() + 5.0) / (sigma_min - max_re);
    let mid = (ua / 2.0).max(-10.0);
    let kernel_tol = (inner_tol * 1e-1).max(1e-14);
    let table = KernelTable::build(ua + va - 1.0, FE_U_MAX + vb + 1.0, kernel_tol, &mut |t| {
        parity_kernel(t, idx, delta, kernel_tol)
    })?;
    let mut kernel = |t: f64| table.eval(t.ln());
    let mut lhs = vec![C64::new(0.0, 0.0); s_values.len()];
    let mut panel = |a: f64, b: f64, lhs: &mut [C64]| -> Result<f64> {
        let half = (b - a) / 2.0;
        let us: Vec<f64> = gx.iter().map(|t| a + half * (t + 1.0)).collect();
        let xs: Vec<f64> = us.iter().map(|u| u.exp()).collect();
        let ups: Vec<EvalResult> =
            xs.iter().map(|&x| hankel_point(v, idx.rank(), x, inner_tol, kernel_tol, &mut kernel)).collect::<Result<_>>()?;
        let mut size: f64 = 0.0;
        for ((u, w), y) in us.iter().zip(&gw).zip(&ups) {
            size = size.max(y.value.norm() * (sigma_max * u).exp());
            for (acc, s) in lhs.iter_mut().zip(s_values) {
                *acc += 2.0 * half * w * y.value * (s * u).exp();
            }
        }
        Ok(size)
    };
    let mut u = ua;
    while u < mid {
        let b = (u + 2.0).min(mid);
        panel(u, b, &mut lhs)?;
        u = b;
    }
    let mut peak: f64 = 0.0;
    let mut quiet = 0;
    while quiet < 2 {
        let size = panel(u, u + 0.5, &mut lhs)?;
        peak = peak.max(size);
        quiet = if size < tol * 1e-2 * peak { quiet + 1 } else { 0 };
        u += 0.5;
        if u > FE_U_MAX {
            return Err(Error::Tolerance { tol, achieved: size / peak });
        }
    }
    s_values
        .iter()
        .zip(lhs)
        .map(|(&s, lhs)| {
            let m = v
                .mellin_closed_form(delta, 1.0 - s)
                .unwrap_or_else(|| signed_mellin(v, delta, 1.0 - s, 1e-12));
            let rhs = gamma_product(s, idx, delta)? * m;
            Ok(FunctionalEquation { s, delta, lhs, rhs })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn rel(a: C64, b: C64) -> f64 {
        (a - b).norm() / b.norm()
    }

    fn idx(lam: Vec<C64>, delta: Vec<u8>) -> KernelIndex {
        KernelIndex::new(SpectralIndex::new(lam).unwrap(), delta).unwrap()
    }

    #[test]
    fn maass_kernel_both_sides() {
        let t = 0.6;
        let k = idx(vec![c(0.0, t), c(0.0, -t)], vec![0, 0]);
        for x in [0.2, 1.5, 7.0] {
            let arg = c(4.0 * PI * f64::sqrt(x), 0.0);
            let nu = c(0.0, 2.0 * t);
            let y = classical::bessel_y(nu, arg).unwrap() + classical::bessel_y(-nu, arg).unwrap();
            let want = -PI / (PI * t).cosh() * y;
            let got = bessel_kernel(x, &k, KernelMethod::Auto, 1e-12).unwrap();
            assert!(rel(got.result.value, want) < 1e-9, "x={x}");
            let want = 4.0 * (PI * t).cosh() * classical::bessel_k(nu, arg).unwrap();
            let got = bessel_kernel(-x, &k, KernelMethod::Auto, 1e-12).unwrap();
            assert!(rel(got.result.value, want) < 1e-9, "x=-{x}");
        }
    }

    #[test]
    fn rank_one_is_fourier() {
        let k = idx(vec![c(0.0, 0.0)], vec![0]);
        for x in [-3.3, -0.4, 0.7, 5.0] {
            let got = bessel_kernel(x, &k, KernelMethod::Auto, 1e-13).unwrap().result.value;
            assert!((got - c(0.0, 2.0 * PI * x).exp()).norm() < 1e-11, "x={x}");
        }
        let k = idx(vec![c(0.0, 0.0)], vec![1]);
        let got = bessel_kernel(-0.7, &k, KernelMethod::Auto, 1e-13).unwrap().result.value;
        assert!((got + c(0.0, -2.0 * PI * 0.7).exp()).norm() < 1e-11);
    }

    #[test]
    fn rank_three_matches_contour_integral() {
        let k = idx(vec![c(0.3, 0.1), c(-0.1, -0.2), c(-0.2, 0.1)], vec![1, 0, 1]);
        for x in [8.0, -8.0, 0.3, -0.3] {
            let a = bessel_kernel(x, &k, KernelMethod::Auto, 1e-12).unwrap().result.value;
            let m = mb_kernel(x, &k.lambda, &k.delta, 1e-12).unwrap().value;
            assert!(rel(a, m) < 1e-7, "x={x}: {a} vs {m}");
        }
    }

    #[test]
    fn holomorphic_kernel_switches_to_contour() {
        let k = idx(vec![c(1.5, 0.0), c(-1.5, 0.0)], vec![0, 0]);
        let e = bessel_kernel(-1.0, &k, KernelMethod::Auto, 1e-12).unwrap();
        assert!(e.cancellation > CANCELLATION_SWITCH);
        assert_eq!(e.result.method, Method::MellinBarnes);
        assert!(e.result.value.norm() < 1e-9);
    }

    #[test]
    fn gamma_factor_two_ways() {
        for delta in 0..2 {
            for s in [c(0.5, 0.0), c(0.3, 2.0), c(-1.7, 0.4), c(2.5, -3.0)] {
                let a = gamma_factor(s, delta).unwrap();
                let b = gamma_factor_alt(s, delta).unwrap();
                assert!(rel(a, b) < 1e-12, "δ={delta} s={s}");
            }
        }
    }

    #[test]
    fn asymptotics_leading_term_and_order() {
        let k = idx(vec![c(0.2, 0.0), c(0.1, 0.1), c(-0.3, -0.1)], vec![0, 1, 0]);
        let x: f64 = 20.0;
        let exact = bessel_kernel(x.powi(3), &k, KernelMethod::Auto, 1e-14).unwrap().result.value;
        let a1 = kernel_asymptotics(x, &k, 1).unwrap();
        assert!((a1.terms[0].w - c(x.powf(-1.0), 0.0)).norm() < 1e-15);
        let errs: Vec<f64> = (1..=3).map(|m| (kernel_asymptotics(x, &k, m).unwrap().plus - exact).norm()).collect();
        // error ~ B_M (2πx)^{−M} x^{−1}: each term gains a factor of order 2πx
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!(ratio > x && ratio < 20.0 * PI * x, "{errs:?}");
        }
        let minus = bessel_kernel(-x.powi(3), &k, KernelMethod::Auto, 1e-14).unwrap().result.value;
        assert!((kernel_asymptotics(x, &k, 12).unwrap().minus - minus).norm() < 1e-12);
    }

    #[test]
    fn even_rank_negative_side_is_small() {
        let k = idx(vec![c(0.2, 0.3), c(-0.2, -0.3)], vec![1, 0]);
        let x = 4.0;
        let a = kernel_asymptotics(x, &k, 10).unwrap();
        let neg = bessel_kernel(-x * x, &k, KernelMethod::Auto, 1e-12).unwrap().result.value;
        assert!(neg.norm() <= a.remainder_bound);
        assert_eq!(a.minus, c(0.0, 0.0));
    }

    #[test]
    fn floor_enforced() {
        let k = idx(vec![c(0.0, 0.0); 2], vec![0, 0]);
        assert!(matches!(kernel_asymptotics(0.1, &k, 3), Err(Error::BelowFloor { .. })));
    }

    #[test]
    fn mellin_round_trip() {
        let v = WeightFunction::gaussian_log(0.3, 0.8, 1).unwrap();
        for s in [c(0.5, 0.0), c(1.0, 2.0)] {
            let num = signed_mellin(&v, 1, s, 1e-13);
            let cf = v.mellin_closed_form(1, s).unwrap();
            assert!(rel(num, cf) < 1e-10);
        }
        for x in [-2.0, 0.5, 1.7] {
            let back = mellin_inverse(|d, s| v.mellin_closed_form(d, s).unwrap(), x, 0.5, 40.0, 1e-12);
            assert!((back - v.eval(x)).norm() < 1e-7, "x={x}");
        }
    }

    #[test]
    fn weight_parsing() {
        let w: WeightFunction = "gaussian-log:η=1,mu=0.5,w=2".parse().unwrap();
        assert_eq!(w.parity, 1);
        assert_eq!(w.shape, WeightShape::GaussianLog { mu: 0.5, width: 2.0, scale: 1.0 });
        assert!("gaussian-log".parse::<WeightFunction>().is_ok());
        assert!("box:η=0".parse::<WeightFunction>().is_err());
        assert!("gaussian-log:η=2".parse::<WeightFunction>().is_err());
        assert!(WeightFunction::samples(vec![0.0, 1.0], vec![c(1.0, 0.0), c(0.0, 0.0)], 0).is_err());
    }

    #[test]
    fn rank_one_transform_is_fourier() {
        // Υ(x) = ∫ υ(y) e(xy) dy = 2∫_0^∞ υ(y) cos(2πxy) dy for even υ
        let v = WeightFunction::gaussian_log(0.0, 0.6, 0).unwrap();
        let k = idx(vec![c(0.0, 0.0)], vec![0]);
        let xs = [0.1, 0.45, 1.2];
        let got = hankel_transform(&v, &k, &xs, 1e-10).unwrap();
        for (x, g) in xs.iter().zip(&got) {
            let direct = adaptive(
                |y| c(2.0 * v.eval(y).re * (2.0 * PI * x * y).cos(), 0.0),
                1e-6,
                60.0,
                Tolerance::new(1e-14, 1e-12),
            );
            assert!((g.value - direct.value).norm() < 1e-7, "x={x}");
        }
    }

    #[test]
    fn narrowing_bump_approaches_the_kernel() {
        let k = idx(vec![c(0.1, 0.0), c(-0.1, 0.0)], vec![0, 0]);
        let (x, y0) = (0.8, 1.3);
        let target = bessel_kernel(x * y0, &k, KernelMethod::Auto, 1e-13).unwrap().result.value
            + bessel_kernel(-x * y0, &k, KernelMethod::Auto, 1e-13).unwrap().result.value;
        let mut last = f64::INFINITY;
        for w in [0.1, 0.05, 0.025] {
            let v = WeightFunction::unit_bump(y0, w, 0).unwrap();
            let d = (hankel_transform(&v, &k, &[x], 1e-10).unwrap()[0].value - target).norm();
            assert!(d < last, "w={w}");
            last = d;
        }
    }

    #[test]
    fn functional_equation() {
        let s = [c(0.5, 0.0), c(0.5, 1.0), c(0.5, 2.0)];
        for (lam, delta) in [
            (vec![c(0.1, 0.2), c(-0.1, -0.2)], vec![0, 1]),
            (vec![c(0.2, 0.0), c(0.0, 0.3), c(-0.2, -0.3)], vec![1, 0, 0]),
        ] {
            let k = idx(lam, delta);
            for eta in 0..2 {
                let v = WeightFunction::gaussian_log(0.0, 0.25, eta).unwrap();
                for r in functional_equation_check(&v, &k, &s, 1e-8).unwrap() {
                    assert!(r.relative_error() < 1e-6, "{r:?}");
                }
            }
        }
    }
}
