//! Coefficient tables.
//!
//! * `A_{j,m}`: integers with `A_{j,m} = j·A_{j,m−1} + A_{j−1,m}`
//!   (Stirling numbers of the second kind, `A_{j,m} = S(j+m, j)`).
//! * `U_{k,j}(Λ)`, `V_{k,j}(Λ)`: integer polynomials in `Λ_0, …, Λ_d`, mutually
//!   inverse lower unitriangular matrices. `U` expresses derivatives of J through
//!   index-shifted functions and `V_{n,j}` are the Bessel-equation coefficients.
//! * `B_m(λ;ξ)`: coefficients of the formal solution
//!   `e^{inξz} z^{−(n−1)/2} Σ B_m z^{−m}`, generated numerically in
//!   double-double arithmetic.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::dd::{Cdd, Dd};
use crate::index::{RootOfUnity, SpectralIndex, C64};
use crate::poly::{MPoly, QPoly};

/// Largest coefficient index the B recurrence is run to.
pub const B_MAX_TERMS: usize = 40;

/// `A_{j,m}` for `0 ≤ j ≤ J`, `0 ≤ m ≤ M`.
#[derive(Clone, Debug, PartialEq)]
pub struct ATable {
    entries: Vec<Vec<BigInt>>,
}

impl ATable {
    pub fn build(jmax: usize, mmax: usize) -> Self {
        // Row j = −1 is (1, 0, 0, …); column m = −1 is zero.
        let mut prev: Vec<BigInt> = (0..=mmax).map(|m| BigInt::from((m == 0) as u8)).collect();
        let mut entries = Vec::with_capacity(jmax + 1);
        for j in 0..=jmax {
            let mut row = Vec::with_capacity(mmax + 1);
            for m in 0..=mmax {
                let left = if m == 0 { BigInt::zero() } else { &row[m - 1] * BigInt::from(j) };
                row.push(left + &prev[m]);
            }
            prev = row.clone();
            entries.push(row);
        }
        ATable { entries }
    }

    pub fn get(&self, j: usize, m: usize) -> &BigInt {
        &self.entries[j][m]
    }

    pub fn max_j(&self) -> usize {
        self.entries.len() - 1
    }

    pub fn max_m(&self) -> usize {
        self.entries[0].len() - 1
    }

    pub fn rows(&self) -> &[Vec<BigInt>] {
        &self.entries
    }

    /// Entries that disagree with [`a_closed_form`], as `(j, m)`.
    pub fn closed_form_mismatches(&self) -> Vec<(usize, usize)> {
        let mut bad = Vec::new();
        for j in 0..=self.max_j() {
            for m in 0..=self.max_m() {
                if a_closed_form(j, m) != BigRational::from_integer(self.get(j, m).clone()) {
                    bad.push((j, m));
                }
            }
        }
        bad
    }
}

/// Convenience wrapper for [`ATable::build`].
pub fn build_a_table(jmax: usize, mmax: usize) -> ATable {
    ATable::build(jmax, mmax)
}

fn factorial(k: usize) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

fn binomial(n: i64, k: i64) -> BigInt {
    if k < 0 || n < 0 || k > n {
        return BigInt::zero();
    }
    factorial(n as usize) / (factorial(k as usize) * factorial((n - k) as usize))
}

/// `Σ_{r=1}^{j} (−1)^{j−r} r^{m+j} / (r!(j−r)!)` in exact arithmetic; `A_{0,m}`
/// is 1 for `m = 0` and 0 otherwise.
pub fn a_closed_form(j: usize, m: usize) -> BigRational {
    if j == 0 {
        return BigRational::from_integer(BigInt::from((m == 0) as u8));
    }
    let mut s = BigRational::zero();
    for r in 1..=j {
        let num = BigInt::from(r).pow((m + j) as u32);
        let den = factorial(r) * factorial(j - r);
        let t = BigRational::new(num, den);
        if (j - r) % 2 == 0 {
            s += t;
        } else {
            s -= t;
        }
    }
    s
}

/// Elementary symmetric polynomial `σ_{k,m}` in the variables `Λ_0..Λ_k`
/// (`k = −1` allowed through `kp1 = k + 1 = 0`).
fn sigma_poly(nvars: usize, kp1: usize, m: usize) -> MPoly {
    // e[m] over the first `i` variables
    let mut e: Vec<MPoly> = (0..=m).map(|q| if q == 0 { MPoly::one(nvars) } else { MPoly::zero(nvars) }).collect();
    for i in 0..kp1 {
        let x = MPoly::var(nvars, i);
        for q in (1..=m).rev() {
            e[q] = e[q].add(&x.mul(&e[q - 1]));
        }
    }
    e.swap_remove(m)
}

/// Exact U and V tables for `0 ≤ j ≤ k ≤ n` in the variables `Λ_0..Λ_{n−1}`.
#[derive(Clone, Debug)]
pub struct UvTables {
    n: usize,
    u: Vec<Vec<MPoly>>,
    v: Vec<Vec<MPoly>>,
}

impl UvTables {
    pub fn build(n: usize) -> Self {
        assert!(n >= 1);
        let nv = n;
        // U by its recurrence; row k = −1 is δ_{j,−1}.
        let mut u: Vec<Vec<MPoly>> = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let mut row = Vec::with_capacity(k + 1);
            for j in 0..=k {
                if j == k {
                    row.push(MPoly::one(nv));
                    continue;
                }
                // −(Λ_j + k − 1)·U_{k−1,j} + U_{k−1,j−1}; here j < k so k ≥ 1
                let prev = &u[k - 1];
                let lin = MPoly::var(nv, j).add(&MPoly::constant(nv, k as i64 - 1));
                let mut p = lin.mul(&prev[j]).scale(&BigInt::from(-1));
                if j >= 1 {
                    p = p.add(&prev[j - 1]);
                }
                row.push(p);
            }
            u.push(row);
        }
        // V from its defining sum.
        let a = ATable::build(n, n);
        let mut v: Vec<Vec<MPoly>> = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let sig: Vec<MPoly> = (0..=k).map(|m| sigma_poly(nv, k, m)).collect();
            let row = (0..=k)
                .map(|j| {
                    let mut p = MPoly::zero(nv);
                    for m in 0..=(k - j) {
                        p = p.add(&sig[m].scale(a.get(j, k - j - m)));
                    }
                    p
                })
                .collect();
            v.push(row);
        }
        UvTables { n, u, v }
    }

    pub fn rank(&self) -> usize {
        self.n
    }

    pub fn u(&self, k: usize, j: usize) -> MPoly {
        if j > k {
            MPoly::zero(self.n)
        } else {
            self.u[k][j].clone()
        }
    }

    pub fn v(&self, k: usize, j: usize) -> MPoly {
        if j > k {
            MPoly::zero(self.n)
        } else {
            self.v[k][j].clone()
        }
    }

    /// `Σ_l U_{k,l} V_{l,j}` as an exact polynomial.
    pub fn product_entry(&self, k: usize, j: usize) -> MPoly {
        let mut s = MPoly::zero(self.n);
        for l in j..=k {
            s = s.add(&self.u[k][l].mul(&self.v[l][j]));
        }
        s
    }

    /// Pairs `(k, j)` where `Σ_l U_{k,l}V_{l,j} ≠ δ_{k,j}`.
    pub fn orthogonality_failures(&self) -> Vec<(usize, usize)> {
        let mut bad = Vec::new();
        for k in 0..=self.n {
            for j in 0..=k {
                let want = if j == k { MPoly::one(self.n) } else { MPoly::zero(self.n) };
                if self.product_entry(k, j) != want {
                    bad.push((k, j));
                }
            }
        }
        bad
    }

    /// Pairs `(k, j)` where V fails `V_{k,j} = (Λ_{k−1}+j)V_{k−1,j} + V_{k−1,j−1}`.
    pub fn v_recurrence_failures(&self) -> Vec<(usize, usize)> {
        let mut bad = Vec::new();
        for k in 1..=self.n {
            for j in 0..=k {
                let lin = MPoly::var(self.n, k - 1).add(&MPoly::constant(self.n, j as i64));
                let mut rhs = lin.mul(&self.v(k - 1, j));
                if j >= 1 {
                    rhs = rhs.add(&self.v(k - 1, j - 1));
                }
                if rhs != self.v[k][j] {
                    bad.push((k, j));
                }
            }
        }
        bad
    }
}

/// The variables `Λ_m = n·λ_{n−m}` (`m = 0..n−1`, λ 1-based) in which the
/// U/V tables are instantiated.
pub fn big_lambda(lambda: &SpectralIndex) -> Vec<C64> {
    let n = lambda.rank();
    let l = lambda.lambda();
    (0..n).map(|m| n as f64 * l[n - 1 - m]).collect()
}

/// Numeric U and V tables at `Λ`, built by their recurrences.
#[derive(Clone, Debug)]
pub struct NumericUv {
    pub u: Vec<Vec<C64>>,
    pub v: Vec<Vec<C64>>,
}

impl NumericUv {
    pub fn build(big_lambda: &[C64]) -> Self {
        let n = big_lambda.len();
        let zero = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        let mut u = vec![vec![zero; n + 1]; n + 1];
        let mut v = vec![vec![zero; n + 1]; n + 1];
        u[0][0] = one;
        v[0][0] = one;
        for k in 1..=n {
            for j in 0..=k {
                if j == k {
                    u[k][j] = one;
                    v[k][j] = one;
                    continue;
                }
                let up = if j >= 1 { u[k - 1][j - 1] } else { zero };
                u[k][j] = -(big_lambda[j] + (k as f64 - 1.0)) * u[k - 1][j] + up;
                let vp = if j >= 1 { v[k - 1][j - 1] } else { zero };
                v[k][j] = (big_lambda[k - 1] + j as f64) * v[k - 1][j] + vp;
            }
        }
        NumericUv { u, v }
    }

    /// Largest `|Σ_l U_{k,l}V_{l,j} − δ_{k,j}|`, relative to `Σ_l |U_{k,l}V_{l,j}|`.
    pub fn orthogonality_defect(&self) -> f64 {
        let n = self.u.len() - 1;
        let mut worst: f64 = 0.0;
        for k in 0..=n {
            for j in 0..=k {
                let mut s = C64::new(0.0, 0.0);
                let mut scale = 0.0;
                for l in j..=k {
                    let t = self.u[k][l] * self.v[l][j];
                    s += t;
                    scale += t.norm();
                }
                let delta = if j == k { 1.0 } else { 0.0 };
                worst = worst.max((s - delta).norm() / scale.max(1.0));
            }
        }
        worst
    }
}

/// Coefficients `V_{n,j}(λ)` of the Bessel equation
/// `Σ_{j≥1} V_{n,j} z^j w^{(j)} + (V_{n,0} − ς(in)^n z^n) w = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct BesselEqCoeffs {
    pub n: usize,
    pub v: Vec<C64>,
}

impl BesselEqCoeffs {
    /// `Σ_j V_{n,j} [a]_j`, which vanishes at each indicial root `a = −nλ_l`.
    pub fn indicial(&self, a: C64) -> C64 {
        let mut s = C64::new(0.0, 0.0);
        let mut fall = C64::new(1.0, 0.0);
        for (j, v) in self.v.iter().enumerate() {
            s += v * fall;
            fall *= a - j as f64;
        }
        s
    }
}

/// `V_{n,j}(λ) = Σ_{m=0}^{n−j} A_{j,n−j−m} n^m σ_m(λ)`.
pub fn bessel_eq_coeffs(lambda: &SpectralIndex) -> BesselEqCoeffs {
    let n = lambda.rank();
    let sig: Vec<Cdd> = elementary_symmetric_dd(lambda.lambda());
    let a = ATable::build(n, n);
    let v = bessel_v_dd(n, &sig, &a).into_iter().map(Cdd::to_c64).collect();
    BesselEqCoeffs { n, v }
}

fn bigint_to_dd(k: &BigInt) -> Dd {
    use num_traits::{FromPrimitive, ToPrimitive};
    // large entries need more than 53 bits; split into two doubles
    let hi = k.to_f64().unwrap_or(f64::INFINITY);
    let Some(hi_int) = BigInt::from_f64(hi) else {
        return Dd::new(hi);
    };
    let rest = (k - hi_int).to_f64().unwrap_or(0.0);
    Dd::new(hi) + Dd::new(rest)
}

fn elementary_symmetric_dd(lambda: &[C64]) -> Vec<Cdd> {
    let n = lambda.len();
    let mut e = vec![Cdd::ZERO; n + 1];
    e[0] = Cdd::ONE;
    for &x in lambda {
        let x = Cdd::from(x);
        for m in (1..=n).rev() {
            e[m] = e[m] + x * e[m - 1];
        }
    }
    e
}

fn bessel_v_dd(n: usize, sig: &[Cdd], a: &ATable) -> Vec<Cdd> {
    (0..=n)
        .map(|j| {
            let mut s = Cdd::ZERO;
            let mut nm = Dd::ONE;
            for m in 0..=(n - j) {
                let c = bigint_to_dd(a.get(j, n - j - m)) * nm;
                s = s + sig[m].scale(c);
                nm = nm * Dd::new(n as f64);
            }
            s
        })
        .collect()
}

/// `B_m(λ;ξ)` for `m = 0..=M`, together with the transformed-equation
/// coefficients `W_{j,k}(λ)`.
#[derive(Clone, Debug)]
pub struct BTable {
    pub n: usize,
    pub xi: RootOfUnity,
    pub b: Vec<C64>,
    /// `w[j][k]` for `j + k ≤ n`.
    pub w: Vec<Vec<C64>>,
}

impl BTable {
    pub fn get(&self, m: usize) -> C64 {
        self.b[m]
    }

    pub fn len(&self) -> usize {
        self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b.is_empty()
    }
}

fn cdd_pow(z: Cdd, k: usize) -> Cdd {
    let mut r = Cdd::ONE;
    for _ in 0..k {
        r = r * z;
    }
    r
}

/// Runs the recurrence
/// `m W_{1,0} B_m = Σ_{2 ≤ j+k ≤ min(n, m+1)} W_{j,k} [j+k−m−1]_j B_{m+1−j−k}`.
///
/// Panics if `ξ^n ∉ {±1}` is violated or the vanishing of `W_{0,0}` and
/// `W_{0,1}` fails, since either means the inputs are inconsistent.
pub fn build_b_table(lambda: &SpectralIndex, xi: &RootOfUnity, terms: usize) -> BTable {
    let n = lambda.rank();
    assert_eq!(xi.rank(), n, "root of unity has the wrong rank");
    let terms = terms.min(B_MAX_TERMS);
    let sig = elementary_symmetric_dd(lambda.lambda());
    let a = ATable::build(n, n);
    let v = bessel_v_dd(n, &sig, &a);
    let (s, c) = xi.argument().sin_cos();
    let xi_dd = Cdd::from(C64::new(c, s));
    // α = i n ξ
    let alpha = Cdd::new(-xi_dd.im, xi_dd.re).scale(Dd::new(n as f64));
    let beta = -(n as f64 - 1.0) / 2.0;
    let fact = |k: usize| (1..=k).fold(Dd::ONE, |acc, i| acc * Dd::new(i as f64));
    let falling = |x: f64, k: usize| (0..k).fold(Dd::ONE, |acc, i| acc * (Dd::new(x) - Dd::new(i as f64)));

    let mut w = vec![vec![Cdd::ZERO; n + 1]; n + 1];
    for j in 0..=n {
        for k in 0..=(n - j) {
            let mut sum = Cdd::ZERO;
            for r in 0..=k {
                let c = fact(n - r) / fact(k - r) * falling(beta, k - r);
                sum = sum + v[n - r].scale(c);
            }
            let pre = cdd_pow(alpha, n - j - k).scale(Dd::ONE / (fact(j) * fact(n - j - k)));
            w[j][k] = pre * sum;
        }
    }
    // ς(in)^n with ς = ξ^n
    let varsigma = xi.nth_power_sign() as f64;
    let in_n = cdd_pow(Cdd::new(Dd::ZERO, Dd::new(n as f64)), n).scale(Dd::new(varsigma));
    w[0][0] = w[0][0] - in_n;
    let scale = alpha.norm_sqr().to_f64().sqrt().powi(n as i32);
    let w00 = w[0][0].to_c64().norm();
    assert!(w00 <= 1e-13 * scale.max(1.0), "W_00 = {w00} does not vanish");
    if n >= 1 {
        let w01 = w[0][1].to_c64().norm();
        let scale1 = v.iter().map(|x| x.to_c64().norm()).fold(1.0, f64::max) * scale;
        assert!(w01 <= 1e-13 * scale1, "W_01 = {w01} does not vanish");
    }
    w[0][0] = Cdd::ZERO;
    if n >= 1 {
        w[0][1] = Cdd::ZERO;
    }

    let mut b = vec![Cdd::ONE];
    if n >= 1 {
        for m in 1..=terms {
            let mut rhs = Cdd::ZERO;
            for j in 0..=n {
                for k in 0..=(n - j) {
                    let jk = j + k;
                    if jk < 2 || jk > m + 1 {
                        continue;
                    }
                    let f = falling(jk as f64 - m as f64 - 1.0, j);
                    rhs = rhs + (w[j][k] * b[m + 1 - jk]).scale(f);
                }
            }
            let den = w[1][0].scale(Dd::new(m as f64));
            b.push(rhs / den);
        }
    }
    BTable {
        n,
        xi: *xi,
        b: b.into_iter().map(Cdd::to_c64).collect(),
        w: w.into_iter().map(|row| row.into_iter().map(Cdd::to_c64).collect()).collect(),
    }
}

/// `(½ − 2λ)_m (½ + 2λ)_m / ((4iξ)^m m!)`, the rank-two coefficients.
pub fn rank2_b_closed_form(lambda: C64, xi: C64, m: usize) -> C64 {
    let mut r = C64::new(1.0, 0.0);
    let four_i_xi = C64::new(0.0, 4.0) * xi;
    for k in 0..m {
        let kf = k as f64;
        r *= (0.5 - 2.0 * lambda + kf) * (0.5 + 2.0 * lambda + kf) / (four_i_xi * (kf + 1.0));
    }
    r
}

/// Outcome of the exact check of the rank-two identity between the two
/// expressions for the asymptotic coefficients of Hankel functions.
#[derive(Clone, Debug)]
pub struct IdentityReport {
    pub m: usize,
    pub holds: bool,
    /// First degree in ν where the sides differ, if any.
    pub first_difference: Option<usize>,
    pub lhs: QPoly,
    pub rhs: QPoly,
}

fn rational(k: BigInt) -> BigRational {
    BigRational::from_integer(k)
}

/// Expands, as polynomials in ν with rational coefficients,
///
/// `(−1)^m (½−ν)_m (½+ν)_m / m!`
///
/// and
///
/// `(1−ν)_{2m}/m! + Σ_{r=1}^{2m} (−1)^r (2m+2r)! / (4^r (m+r)! r!)
///   Σ_{α=0}^{2m−r} C(2m−α−1, r−1) (1−ν)_α / α!`
///
/// for each `m ≤ m_max`.
pub fn check_combinatorial_identity(m_max: usize) -> Vec<IdentityReport> {
    let half = BigRational::new(1.into(), 2.into());
    let one = BigRational::one();
    let minus_one = -BigRational::one();
    (0..=m_max)
        .map(|m| {
            let mf = rational(factorial(m));
            let sign = if m % 2 == 0 { one.clone() } else { minus_one.clone() };
            let lhs = QPoly::pochhammer(&half, &minus_one, m)
                .mul(&QPoly::pochhammer(&half, &one, m))
                .scale(&(sign / &mf));

            let mut rhs = QPoly::pochhammer(&one, &minus_one, 2 * m).scale(&(one.clone() / &mf));
            for r in 1..=2 * m {
                let num = rational(factorial(2 * m + 2 * r));
                let den = rational(BigInt::from(4).pow(r as u32) * factorial(m + r) * factorial(r));
                let outer = if r % 2 == 0 { num / den } else { -(num / den) };
                let mut inner = QPoly::zero();
                for alpha in 0..=(2 * m - r) {
                    let c = binomial(2 * m as i64 - alpha as i64 - 1, r as i64 - 1);
                    if c.is_zero() {
                        continue;
                    }
                    let k = rational(c) / rational(factorial(alpha));
                    inner = inner.add(&QPoly::pochhammer(&one, &minus_one, alpha).scale(&k));
                }
                rhs = rhs.add(&inner.scale(&outer));
            }
            let first_difference = lhs.first_difference(&rhs);
            IdentityReport { m, holds: first_difference.is_none(), first_difference, lhs, rhs }
        })
        .collect()
}
