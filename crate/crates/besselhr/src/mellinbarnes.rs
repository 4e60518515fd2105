//! The defining Mellin–Barnes integral
//!
//! J(x;ς,λ) = (1/2πi) ∫ ∏_l Γ(s−λ_l) e(ς_l(s−λ_l)/4) x^{−ns} ds,
//!
//! integrated numerically as an independent oracle. The contour is a polyline
//! adapted to the saddle point of the integrand. With c = (n₊−n₋)/n the
//! integrand behaves like exp(n(s log(s/x) − s + iπcs/2)), whose saddle is
//! s₀ = x e^{−iπc/2}.
//!
//! * |c| < 1 (K-type): the vertical line through s₀. Both tails decay
//!   exponentially and the exponentially small value is not the result of
//!   cancellation.
//! * c = ±1 (H-type): s₀ = ∓ix lies on the imaginary axis and the vertical
//!   line decays only polynomially on one side. The contour comes in from
//!   infinity along the steepest-descent direction e^{±5πi/4}, crosses the
//!   saddle at 45°, and leaves vertically once it has passed all the poles.
//!
//! All factors are combined as a single logarithm so that Γ(s)ⁿ and x^{−ns}
//! never overflow separately.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::gamma::log_gamma;
use crate::index::{SignVector, SpectralIndex, C64};
use crate::quad::{adaptive, Tolerance};
use crate::{EvalResult, Method};

/// Integration path: an incoming ray, a polyline and an outgoing ray.
#[derive(Clone, Debug, PartialEq)]
pub struct Contour {
    /// Real part of the vertical part of the contour.
    pub base_real_part: f64,
    /// Distance of the bend (H-type) or of the saddle (K-type) from the real
    /// axis.
    pub bend_height: f64,
    /// Angle between the bent part and the vertical; 0 for a straight line.
    pub bend_angle: f64,
    /// Largest |s| reached on either ray.
    pub truncation: f64,
    pub vertices: Vec<C64>,
    /// Direction of the incoming ray, pointing away from the first vertex.
    pub in_dir: C64,
    pub out_dir: C64,
}

/// Perturbations of the default contour (for invariance checks).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContourOptions {
    pub sigma_shift: f64,
    pub height_scale: f64,
}

impl Default for ContourOptions {
    fn default() -> Self {
        ContourOptions { sigma_shift: 0.0, height_scale: 1.0 }
    }
}

/// A contour integral with its error data.
#[derive(Clone, Debug, PartialEq)]
pub struct MbEval {
    pub value: C64,
    pub error_estimate: f64,
    /// (1/2π)∫|integrand||ds|, the scale of possible cancellation.
    pub abs_integral: f64,
    pub evals: usize,
    pub contour: Contour,
}

impl MbEval {
    pub fn to_result(&self) -> EvalResult {
        EvalResult { value: self.value, error_estimate: self.error_estimate, method: Method::MellinBarnes }
    }
}

/// log of G(s;ς,λ) x^{−ns}.
fn log_integrand(s: C64, signs: &[i8], lam: &[C64], log_x: f64) -> C64 {
    let n = lam.len() as f64;
    let mut acc = -n * s * log_x;
    for (&sg, &l) in signs.iter().zip(lam) {
        let u = s - l;
        // poles sit strictly left of the contour, so log_gamma never fails here
        acc += log_gamma(u).unwrap_or(C64::new(f64::INFINITY, 0.0));
        acc += C64::new(0.0, sg as f64 * PI / 2.0) * u;
    }
    acc
}

pub fn default_contour(x: f64, signs: &SignVector, lambda: &SpectralIndex, opts: ContourOptions) -> Contour {
    let n = signs.rank() as f64;
    let c = (signs.n_plus() as f64 - signs.n_minus() as f64) / n;
    let lam = lambda.lambda();
    let max_re = lam.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
    let max_im = lam.iter().map(|l| l.im.abs()).fold(0.0, f64::max);
    let s0 = C64::from_polar(x, -PI * c / 2.0);
    if signs.is_constant() {
        let sg = if c > 0.0 { 1.0 } else { -1.0 };
        let sigma = (max_re + 0.5).max(0.5) + opts.sigma_shift;
        let y = x.max(max_re + max_im + 1.0) * opts.height_scale;
        // for c = +1: ray from ∞e^{5πi/4} to −iY, up at 45° to σ + i(σ−Y),
        // then up to +i∞; c = −1 is the mirror image
        let a = C64::new(0.0, -sg * y);
        let b = C64::new(sigma, sg * (sigma - y));
        let (vertices, in_dir, out_dir) = if sg > 0.0 {
            (vec![a, b], C64::from_polar(1.0, 5.0 * PI / 4.0), C64::i())
        } else {
            (vec![b, a], -C64::i(), C64::from_polar(1.0, 3.0 * PI / 4.0))
        };
        Contour {
            base_real_part: sigma,
            bend_height: y,
            bend_angle: PI / 4.0,
            truncation: 0.0,
            vertices,
            in_dir,
            out_dir,
        }
    } else {
        let sigma = s0.re.max(max_re + 0.5) + opts.sigma_shift;
        let v = C64::new(sigma, s0.im * opts.height_scale);
        Contour {
            base_real_part: sigma,
            bend_height: v.im.abs(),
            bend_angle: 0.0,
            truncation: 0.0,
            vertices: vec![v],
            in_dir: -C64::i(),
            out_dir: C64::i(),
        }
    }
}

struct Accum {
    value: C64,
    error: f64,
    abs: f64,
    evals: usize,
}

/// ∫ f(s) ds over [a, b] with the stated relative tolerance.
fn segment<F: Fn(C64) -> C64>(f: &F, a: C64, b: C64, rel: f64, abs_floor: f64, acc: &mut Accum) {
    let d = b - a;
    let r = adaptive(|t| f(a + d * t) * d, 0.0, 1.0, Tolerance { abs: abs_floor, rel, max_evals: 100_000 });
    acc.value += r.value;
    acc.error += r.error;
    acc.abs += r.abs_integral;
    acc.evals += r.evals;
}

/// ∫ f over the ray v + r·dir, r ∈ [0, ∞), in panels until the integrand has
/// died out. Returns the largest r reached.
fn ray<F: Fn(C64) -> C64>(f: &F, v: C64, dir: C64, panel: f64, rel: f64, acc: &mut Accum) -> f64 {
    let mut r0 = 0.0;
    let mut quiet = 0;
    for _ in 0..20_000 {
        let r1 = r0 + panel;
        let before = acc.abs;
        let floor = 0.01 * rel * acc.abs;
        segment(f, v + dir * r0, v + dir * r1, rel, floor, acc);
        let added = acc.abs - before;
        let decreasing = f(v + dir * r1).norm() <= f(v + dir * r0).norm();
        if decreasing && added <= 1e-3 * rel * acc.abs {
            quiet += 1;
            if quiet >= 2 {
                return r1;
            }
        } else {
            quiet = 0;
        }
        r0 = r1;
    }
    acc.error = f64::INFINITY;
    r0
}

/// J(x;ς,λ) by contour quadrature; `tol` is relative to the integral of the
/// absolute value of the integrand along the contour.
pub fn mb_eval(x: f64, signs: &SignVector, lambda: &SpectralIndex, tol: f64) -> Result<MbEval> {
    mb_eval_with(x, signs, lambda, tol, ContourOptions::default())
}

pub fn mb_eval_with(
    x: f64,
    signs: &SignVector,
    lambda: &SpectralIndex,
    tol: f64,
    opts: ContourOptions,
) -> Result<MbEval> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Invalid(format!("the Mellin-Barnes integral needs x > 0, got {x}")));
    }
    if signs.rank() != lambda.rank() {
        return Err(Error::Invalid(format!(
            "sign vector has length {} but the index has rank {}",
            signs.rank(),
            lambda.rank()
        )));
    }
    let mut contour = default_contour(x, signs, lambda, opts);
    let lam = lambda.lambda().to_vec();
    let sg = signs.signs().to_vec();
    let log_x = x.ln();
    let f = |s: C64| log_integrand(s, &sg, &lam, log_x).exp();
    let rel = tol * 0.1;
    let mut acc = Accum { value: C64::new(0.0, 0.0), error: 0.0, abs: 0.0, evals: 0 };
    for w in contour.vertices.windows(2) {
        segment(&f, w[0], w[1], rel, 0.0, &mut acc);
    }
    if acc.abs == 0.0 {
        acc.abs = contour.vertices.iter().map(|v| f(*v).norm()).fold(0.0, f64::max);
    }
    let panel = (0.5 * x.sqrt()).max(2.0);
    let first = contour.vertices[0];
    let last = *contour.vertices.last().expect("contour has a vertex");
    // the incoming ray is traversed towards the first vertex
    let mut inc = Accum { value: C64::new(0.0, 0.0), error: 0.0, abs: acc.abs, evals: 0 };
    let r_in = ray(&f, first, contour.in_dir, panel, rel, &mut inc);
    let r_out = ray(&f, last, contour.out_dir, panel, rel, &mut acc);
    acc.value -= inc.value;
    acc.error += inc.error;
    acc.abs = acc.abs.max(inc.abs) + (inc.abs - acc.abs.min(inc.abs)).max(0.0);
    acc.evals += inc.evals;
    contour.truncation = (first + contour.in_dir * r_in).norm().max((last + contour.out_dir * r_out).norm());

    let scale = 1.0 / (2.0 * PI);
    let value = acc.value * C64::new(0.0, -scale);
    let abs_integral = acc.abs * scale;
    let error_estimate = acc.error * scale + abs_integral * 8.0 * f64::EPSILON * (1.0 + x.ln().abs());
    if !value.re.is_finite() || !value.im.is_finite() || !error_estimate.is_finite() {
        return Err(Error::Tolerance { tol, achieved: f64::INFINITY });
    }
    if error_estimate > tol * abs_integral.max(value.norm()) {
        return Err(Error::Tolerance { tol, achieved: error_estimate / abs_integral });
    }
    Ok(MbEval { value, error_estimate, abs_integral, evals: acc.evals, contour })
}

/// The Bessel kernel J_(λ,δ)(x) = Σ_{ς : ∏ς = sgn x} (∏ς_l^{δ_l}) J(2π|x|^{1/n};ς,λ),
/// each term by contour quadrature.
pub fn mb_kernel(x: f64, lambda: &SpectralIndex, delta: &[u8], tol: f64) -> Result<MbEval> {
    let n = lambda.rank();
    if x == 0.0 || !x.is_finite() {
        return Err(Error::Invalid(format!("the kernel needs x ≠ 0, got {x}")));
    }
    if delta.len() != n {
        return Err(Error::Invalid(format!("parity vector has length {} but the index has rank {n}", delta.len())));
    }
    let sign = if x > 0.0 { 1 } else { -1 };
    let y = 2.0 * PI * x.abs().powf(1.0 / n as f64);
    let mut out: Option<MbEval> = None;
    for s in SignVector::with_product(n, sign) {
        let w = s.parity_weight(delta);
        let e = mb_eval(y, &s, lambda, tol)?;
        out = Some(match out {
            None => MbEval { value: w * e.value, ..e },
            Some(o) => MbEval {
                value: o.value + w * e.value,
                error_estimate: o.error_estimate + e.error_estimate,
                abs_integral: o.abs_integral + e.abs_integral,
                evals: o.evals + e.evals,
                contour: o.contour,
            },
        });
    }
    out.ok_or_else(|| Error::Invalid("no sign vectors".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical;
    use crate::series;
    use crate::SurfacePoint;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn rel(a: C64, b: C64) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn rank_one() {
        let lam = SpectralIndex::zero(1);
        for x in [0.1, 1.0, 13.0, 50.0] {
            for s in [1i8, -1] {
                let v = mb_eval(x, &SignVector::new(vec![s]).unwrap(), &lam, 1e-12).unwrap();
                assert!((v.value - c(0.0, s as f64 * x).exp()).norm() < 1e-10, "x={x} s={s}: {}", v.value);
            }
        }
    }

    #[test]
    fn rank_two_k() {
        let lam = c(0.2, 0.1);
        let idx = SpectralIndex::new(vec![lam, -lam]).unwrap();
        for x in [0.5, 4.0, 20.0] {
            let v = mb_eval(x, &SignVector::parse("+-").unwrap(), &idx, 1e-12).unwrap();
            let want = 2.0 * (c(0.0, -PI) * lam).exp() * classical::bessel_k(2.0 * lam, c(2.0 * x, 0.0)).unwrap();
            assert!(rel(v.value, want) < 1e-10, "x={x}");
        }
    }

    #[test]
    fn rank_three_matches_series() {
        let idx = SpectralIndex::from_real(&[0.3, -0.1, -0.2]).unwrap();
        for s in SignVector::all(3) {
            for x in [0.7, 2.0, 9.0] {
                let m = mb_eval(x, &s, &idx, 1e-12).unwrap();
                let r = series::j_function(&SurfacePoint::real(x), &s, &idx, 1e-14).unwrap();
                assert!(rel(m.value, r.value) < 1e-8, "s={s} x={x}: {} vs {}", m.value, r.value);
            }
        }
    }

    #[test]
    fn contour_invariance() {
        let idx = SpectralIndex::new(vec![c(0.3, 0.2), c(-0.1, 0.0), c(-0.2, -0.2)]).unwrap();
        for s in ["+++", "+-+", "--+"] {
            let s = SignVector::parse(s).unwrap();
            let base = mb_eval(3.0, &s, &idx, 1e-12).unwrap();
            for opts in [
                ContourOptions { sigma_shift: 0.2, height_scale: 1.0 },
                ContourOptions { sigma_shift: 0.0, height_scale: 2.0 },
            ] {
                let other = mb_eval_with(3.0, &s, &idx, 1e-12, opts).unwrap();
                assert!(rel(other.value, base.value) < 1e-9, "s={s} {opts:?}");
            }
        }
    }

    #[test]
    fn holomorphic_kernel_vanishes_on_the_left() {
        // λ = ((k−1)/2, −(k−1)/2), δ = (k mod 2, 0): J(−x) = 0
        let k = 3.0;
        let idx = SpectralIndex::from_real(&[(k - 1.0) / 2.0, -(k - 1.0) / 2.0]).unwrap();
        let v = mb_kernel(-2.0, &idx, &[1, 0], 1e-12).unwrap();
        assert!(v.value.norm() < 1e-10 * v.abs_integral.max(1.0), "{}", v.value);
    }

    #[test]
    fn maass_kernel() {
        // λ = (it, −it), δ = 0: J(−x) = 4cosh(πt)K_{2it}(4π√x)
        let t = 0.7;
        let idx = SpectralIndex::new(vec![c(0.0, t), c(0.0, -t)]).unwrap();
        let x: f64 = 0.3;
        let v = mb_kernel(-x, &idx, &[0, 0], 1e-12).unwrap();
        let want = 4.0 * (PI * t).cosh() * classical::bessel_k(c(0.0, 2.0 * t), c(4.0 * PI * x.sqrt(), 0.0)).unwrap();
        assert!(rel(v.value, want) < 1e-9);
    }

    #[test]
    fn rejects_bad_input() {
        let idx = SpectralIndex::zero(2);
        assert!(mb_eval(-1.0, &SignVector::parse("++").unwrap(), &idx, 1e-10).is_err());
        assert!(mb_kernel(0.0, &idx, &[0, 0], 1e-10).is_err());
    }
}
