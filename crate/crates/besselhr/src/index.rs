//! Domain types shared by every evaluator: the spectral index λ, its
//! re-parametrization ν, sign vectors, points of the universal cover of
//! ℂ∖{0} and roots of unity with designated arguments.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// The index λ = (λ₁, …, λₙ) with Σλ = 0.
///
/// Construction subtracts the mean, so any vector is accepted.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralIndex {
    lambda: Vec<C64>,
}

impl SpectralIndex {
    pub fn new(lambda: Vec<C64>) -> Result<Self> {
        if lambda.is_empty() {
            return Err(Error::Invalid("the index needs at least one component".into()));
        }
        if lambda.iter().any(|l| !l.re.is_finite() || !l.im.is_finite()) {
            return Err(Error::Invalid("index components must be finite".into()));
        }
        let mean = lambda.iter().sum::<C64>() / lambda.len() as f64;
        let lambda = lambda.into_iter().map(|l| l - mean).collect();
        Ok(SpectralIndex { lambda })
    }

    pub fn from_real(lambda: &[f64]) -> Result<Self> {
        Self::new(lambda.iter().map(|&l| C64::new(l, 0.0)).collect())
    }

    /// The all-zero index of rank n.
    pub fn zero(n: usize) -> Self {
        SpectralIndex { lambda: vec![C64::new(0.0, 0.0); n.max(1)] }
    }

    /// λ = (1/n)((n−1)/2, (n−3)/2, …, −(n−1)/2), the index for which J(x;ς,λ)
    /// is elementary.
    pub fn prototype(n: usize) -> Self {
        let n = n.max(1);
        let lambda = (1..=n)
            .map(|l| C64::new(((n as f64 + 1.0) / 2.0 - l as f64) / n as f64, 0.0))
            .collect();
        SpectralIndex { lambda }
    }

    pub fn rank(&self) -> usize {
        self.lambda.len()
    }

    pub fn lambda(&self) -> &[C64] {
        &self.lambda
    }

    /// max|λ_l| + 1.
    pub fn size_bound(&self) -> f64 {
        self.lambda.iter().map(|l| l.norm()).fold(0.0, f64::max) + 1.0
    }

    /// max|Re λ_l|.
    pub fn real_bound(&self) -> f64 {
        self.lambda.iter().map(|l| l.re.abs()).fold(0.0, f64::max)
    }

    pub fn max_re(&self) -> f64 {
        self.lambda.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs_im(&self) -> f64 {
        self.lambda.iter().map(|l| l.im.abs()).fold(0.0, f64::max)
    }

    /// Distance from the closest pairwise difference λ_l − λ_k to ℤ.
    /// Zero exactly when λ is non-generic; infinite for rank one.
    pub fn genericity_gap(&self) -> f64 {
        let mut gap = f64::INFINITY;
        for (l, a) in self.lambda.iter().enumerate() {
            for b in &self.lambda[l + 1..] {
                let d = a - b;
                let off = C64::new(d.re - d.re.round(), d.im);
                gap = gap.min(off.norm());
            }
        }
        gap
    }

    /// Elementary symmetric polynomials σ_0..σ_n of the components.
    pub fn elementary_symmetric(&self) -> Vec<C64> {
        elementary_symmetric(&self.lambda)
    }

    pub fn nu(&self) -> NuIndex {
        nu_of_lambda(self)
    }

    pub fn perturbed(&self, dir: &[C64], t: C64) -> Self {
        let lambda = self.lambda.iter().zip(dir).map(|(l, u)| l + t * u).collect();
        SpectralIndex::new(lambda).expect("perturbation of a valid index")
    }
}

impl fmt::Display for SpectralIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.lambda.iter().map(|l| format_complex(*l)).collect();
        write!(f, "({})", parts.join(", "))
    }
}

pub fn format_complex(z: C64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else if z.im < 0.0 {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

/// σ_0..σ_len of the given values, σ_0 = 1.
pub fn elementary_symmetric(v: &[C64]) -> Vec<C64> {
    let mut e = vec![C64::new(0.0, 0.0); v.len() + 1];
    e[0] = C64::new(1.0, 0.0);
    for (i, x) in v.iter().enumerate() {
        for k in (1..=i + 1).rev() {
            let prev = e[k - 1];
            e[k] += prev * x;
        }
    }
    e
}

/// ν_l = λ_l − λ_n for l = 1..n−1.
#[derive(Clone, Debug, PartialEq)]
pub struct NuIndex {
    nu: Vec<C64>,
}

impl NuIndex {
    pub fn new(nu: Vec<C64>) -> Self {
        NuIndex { nu }
    }

    pub fn nu(&self) -> &[C64] {
        &self.nu
    }

    pub fn d(&self) -> usize {
        self.nu.len()
    }

    pub fn sum(&self) -> C64 {
        self.nu.iter().sum()
    }

    /// ν + e^l where e^l = (1,…,1,0,…,0) has l leading ones; e^0 = e^d+1 = 0.
    pub fn shifted_leading(&self, l: usize) -> Self {
        let mut nu = self.nu.clone();
        if l <= nu.len() {
            for v in nu.iter_mut().take(l) {
                *v += 1.0;
            }
        }
        NuIndex { nu }
    }

    /// ν − e_l with e_l the l-th unit vector (1-based).
    pub fn minus_unit(&self, l: usize) -> Self {
        let mut nu = self.nu.clone();
        nu[l - 1] -= 1.0;
        NuIndex { nu }
    }
}

pub fn lambda_of_nu(nu: &NuIndex) -> SpectralIndex {
    let n = nu.d() + 1;
    let mean = nu.sum() / n as f64;
    let mut lambda: Vec<C64> = nu.nu().iter().map(|v| v - mean).collect();
    lambda.push(-mean);
    SpectralIndex { lambda }
}

pub fn nu_of_lambda(lambda: &SpectralIndex) -> NuIndex {
    let l = lambda.lambda();
    let last = l[l.len() - 1];
    NuIndex { nu: l[..l.len() - 1].iter().map(|v| v - last).collect() }
}

/// ς ∈ {+,−}ⁿ.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SignVector {
    signs: Vec<i8>,
}

impl SignVector {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if signs.is_empty() || signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::Invalid("signs must be a nonempty vector of +1/-1".into()));
        }
        Ok(SignVector { signs })
    }

    pub fn parse(s: &str) -> Result<Self> {
        let signs = s
            .chars()
            .map(|c| match c {
                '+' => Ok(1),
                '-' => Ok(-1),
                _ => Err(Error::Invalid(format!("bad sign character {c:?} in {s:?}"))),
            })
            .collect::<Result<Vec<i8>>>()?;
        Self::new(signs)
    }

    pub fn all_equal(n: usize, sign: i8) -> Self {
        SignVector { signs: vec![if sign < 0 { -1 } else { 1 }; n] }
    }

    /// All 2ⁿ sign vectors in lexicographic order, + before −.
    pub fn all(n: usize) -> Vec<SignVector> {
        (0..1usize << n)
            .map(|mask| SignVector {
                signs: (0..n).map(|l| if mask >> (n - 1 - l) & 1 == 1 { -1 } else { 1 }).collect(),
            })
            .collect()
    }

    /// The 2ⁿ⁻¹ sign vectors with ∏ς_l = sign.
    pub fn with_product(n: usize, sign: i8) -> Vec<SignVector> {
        Self::all(n).into_iter().filter(|s| s.product() == sign).collect()
    }

    pub fn rank(&self) -> usize {
        self.signs.len()
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn get(&self, l: usize) -> i8 {
        self.signs[l]
    }

    pub fn n_plus(&self) -> usize {
        self.signs.iter().filter(|&&s| s > 0).count()
    }

    pub fn n_minus(&self) -> usize {
        self.rank() - self.n_plus()
    }

    /// S_n(ς) = (−1)^{n₋}.
    pub fn product(&self) -> i8 {
        if self.n_minus() % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn is_constant(&self) -> bool {
        self.n_plus() == 0 || self.n_minus() == 0
    }

    /// 1-based positions of the + (or −) entries.
    pub fn positions(&self, sign: i8) -> Vec<usize> {
        (0..self.rank()).filter(|&l| self.signs[l] == sign).map(|l| l + 1).collect()
    }

    /// ξ(ς) with designated argument n₋π/n.
    pub fn xi(&self) -> RootOfUnity {
        RootOfUnity::new(self.rank(), self.n_minus() as i64)
    }

    /// ∏ς_l^{δ_l}.
    pub fn parity_weight(&self, delta: &[u8]) -> f64 {
        let odd = self.signs.iter().zip(delta).filter(|(&s, &d)| s < 0 && d % 2 == 1).count();
        if odd % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// I(ς) = sin(n₊π/n), the decay rate of a K-Bessel function divided by n.
    pub fn decay_rate(&self) -> f64 {
        (self.n_plus() as f64 * PI / self.rank() as f64).sin()
    }
}

impl fmt::Display for SignVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.signs {
            write!(f, "{}", if s > 0 { '+' } else { '-' })?;
        }
        Ok(())
    }
}

/// A point of the universal cover of ℂ∖{0}, stored as (log|z|, arg z) with an
/// unbounded argument.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfacePoint {
    pub log_modulus: f64,
    pub argument: f64,
}

impl SurfacePoint {
    pub fn new(modulus: f64, argument: f64) -> Self {
        SurfacePoint { log_modulus: modulus.ln(), argument }
    }

    pub fn from_log(log_modulus: f64, argument: f64) -> Self {
        SurfacePoint { log_modulus, argument }
    }

    /// A positive real point, argument 0.
    pub fn real(x: f64) -> Self {
        Self::new(x, 0.0)
    }

    pub fn modulus(&self) -> f64 {
        self.log_modulus.exp()
    }

    /// log z on the cover.
    pub fn ln(&self) -> C64 {
        C64::new(self.log_modulus, self.argument)
    }

    /// The projection to ℂ.
    pub fn to_complex(&self) -> C64 {
        C64::from_polar(self.modulus(), self.argument)
    }

    /// z^λ = exp(λ log z).
    pub fn pow(&self, lambda: C64) -> C64 {
        (lambda * self.ln()).exp()
    }

    pub fn rotate(&self, angle: f64) -> Self {
        SurfacePoint { log_modulus: self.log_modulus, argument: self.argument + angle }
    }

    pub fn scale(&self, factor: f64) -> Self {
        SurfacePoint { log_modulus: self.log_modulus + factor.ln(), argument: self.argument }
    }

    pub fn times_root(&self, xi: &RootOfUnity) -> Self {
        self.rotate(xi.argument())
    }
}

/// ξ = e^{πik/n}, a 2n-th root of unity whose argument πk/n is kept as
/// designated (never reduced mod 2π).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RootOfUnity {
    n: usize,
    index: i64,
}

impl RootOfUnity {
    pub fn new(n: usize, index: i64) -> Self {
        RootOfUnity { n: n.max(1), index }
    }

    pub fn one(n: usize) -> Self {
        Self::new(n, 0)
    }

    /// −1 = e^{πi}.
    pub fn minus_one(n: usize) -> Self {
        Self::new(n, n as i64)
    }

    /// Parse "k/2n" or "k" (the index k) or the literals 1, -1, i, -i.
    pub fn parse(n: usize, s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "1" | "+1" => return Ok(Self::one(n)),
            "-1" => return Ok(Self::minus_one(n)),
            _ => {}
        }
        if s == "i" || s == "-i" {
            if n % 2 != 0 {
                return Err(Error::Invalid(format!("±i is not a 2n-th root of unity for n = {n}")));
            }
            let k = (n / 2) as i64;
            return Ok(Self::new(n, if s == "i" { k } else { -k }));
        }
        let (num, den) = match s.split_once('/') {
            Some((a, b)) => (a.trim(), Some(b.trim())),
            None => (s, None),
        };
        let k: i64 = num.parse().map_err(|_| Error::Invalid(format!("bad root of unity {s:?}")))?;
        if let Some(den) = den {
            let d: usize = den.parse().map_err(|_| Error::Invalid(format!("bad root of unity {s:?}")))?;
            if d != 2 * n {
                return Err(Error::Invalid(format!("root of unity {s:?} must have denominator 2n = {}", 2 * n)));
            }
        }
        Ok(Self::new(n, k))
    }

    pub fn rank(&self) -> usize {
        self.n
    }

    pub fn index(&self) -> i64 {
        self.index
    }

    pub fn order(&self) -> usize {
        2 * self.n
    }

    pub fn argument(&self) -> f64 {
        PI * self.index as f64 / self.n as f64
    }

    pub fn value(&self) -> C64 {
        C64::from_polar(1.0, self.argument())
    }

    /// ξⁿ = ±1.
    pub fn nth_power_sign(&self) -> i8 {
        if self.index.rem_euclid(2) == 0 {
            1
        } else {
            -1
        }
    }

    /// Membership in X_n(sign) = {ξ : ξⁿ = sign}.
    pub fn in_x(&self, sign: i8) -> bool {
        self.nth_power_sign() == sign
    }

    /// −ξ with argument arg ξ − π.
    pub fn negated(&self) -> Self {
        Self::new(self.n, self.index - self.n as i64)
    }

    /// ξ^p with designated argument p·arg ξ.
    pub fn powf(&self, p: f64) -> C64 {
        C64::from_polar(1.0, p * self.argument())
    }
}

impl fmt::Display for RootOfUnity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.index, 2 * self.n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn lambda_of_nu_examples() {
        let lam = lambda_of_nu(&NuIndex::new(vec![c(0.6, 0.2)]));
        assert!((lam.lambda()[0] - c(0.3, 0.1)).norm() < 1e-15);
        assert!((lam.lambda()[1] - c(-0.3, -0.1)).norm() < 1e-15);

        let lam = lambda_of_nu(&NuIndex::new(vec![c(0.0, 0.0); 3]));
        assert!(lam.lambda().iter().all(|l| l.norm() == 0.0));

        let lam = lambda_of_nu(&NuIndex::new(vec![c(1.0, 0.0), c(2.0, 0.0)]));
        let want = [0.0, 1.0, -1.0];
        for (a, b) in lam.lambda().iter().zip(want) {
            assert!((a - c(b, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn renormalizes_to_zero_mean() {
        let lam = SpectralIndex::from_real(&[1.0, 2.0, 3.0]).unwrap();
        assert!(lam.lambda().iter().sum::<C64>().norm() < 1e-15);
        assert_eq!(lam.lambda()[0], c(-1.0, 0.0));
    }

    #[test]
    fn genericity_gap_examples() {
        // pairwise differences 0.4, 0.5, 0.1
        let lam = SpectralIndex::from_real(&[0.3, -0.1, -0.2]).unwrap();
        assert!((lam.genericity_gap() - 0.1).abs() < 1e-12);
        let lam = SpectralIndex::from_real(&[0.5, -0.5]).unwrap();
        assert_eq!(lam.genericity_gap(), 0.0);
        assert_eq!(SpectralIndex::zero(3).genericity_gap(), 0.0);
        assert!(SpectralIndex::zero(1).genericity_gap().is_infinite());
    }

    #[test]
    fn sign_vector_bookkeeping() {
        let s = SignVector::parse("++-").unwrap();
        assert_eq!((s.n_plus(), s.n_minus(), s.product()), (2, 1, -1));
        assert_eq!(s.positions(1), vec![1, 2]);
        let xi = s.xi();
        assert!((xi.argument() - PI / 3.0).abs() < 1e-15);
        assert!(xi.in_x(-1));
        assert_eq!(SignVector::with_product(3, 1).len(), 4);
        assert!(SignVector::parse("+x").is_err());
    }

    #[test]
    fn xi_of_signs_matches_both_closed_forms() {
        for n in 1..=6 {
            for s in SignVector::all(n) {
                let (np, nm) = (s.n_plus() as f64, s.n_minus() as f64);
                let a = C64::i() * C64::from_polar(1.0, PI * (nm - np) / (2.0 * n as f64));
                let b = -C64::from_polar(1.0, -PI * np / n as f64);
                assert!((s.xi().value() - a).norm() < 1e-14);
                assert!((s.xi().value() - b).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn surface_point_keeps_argument() {
        let z = SurfacePoint::real(2.0).rotate(3.0 * PI);
        assert!((z.argument - 3.0 * PI).abs() < 1e-15);
        // z^{1/2} on the third sheet differs from the principal root by a sign
        let r = z.pow(c(0.5, 0.0));
        assert!((r - c(0.0, -(2f64).sqrt())).norm() < 1e-14);
    }

    #[test]
    fn root_parsing() {
        let xi = RootOfUnity::parse(4, "1/8").unwrap();
        assert!((xi.argument() - PI / 4.0).abs() < 1e-15);
        assert_eq!(RootOfUnity::parse(2, "i").unwrap().index(), 1);
        assert!(RootOfUnity::parse(3, "i").is_err());
        assert!(RootOfUnity::parse(3, "1/4").is_err());
    }
}
