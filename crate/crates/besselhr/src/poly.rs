//! Exact polynomial arithmetic: multivariate with integer coefficients and
//! univariate with rational coefficients.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::index::C64;

/// A polynomial in `nvars` variables with integer coefficients, stored as a
/// map from exponent vectors to nonzero coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MPoly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, BigInt>,
}

impl MPoly {
    pub fn zero(nvars: usize) -> Self {
        MPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: impl Into<BigInt>) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c.into());
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, 1)
    }

    /// The variable x_i.
    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars, "variable {i} out of range");
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(e, BigInt::one());
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &BigInt)> {
        self.terms.iter()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// Largest index of a variable that actually occurs.
    pub fn max_var(&self) -> Option<usize> {
        self.terms.keys().filter_map(|e| e.iter().rposition(|&k| k > 0)).max()
    }

    fn add_term(&mut self, e: Vec<u32>, c: BigInt) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, o: &MPoly) -> MPoly {
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(e.clone(), c.clone());
        }
        r
    }

    pub fn sub(&self, o: &MPoly) -> MPoly {
        self.add(&o.scale(&BigInt::from(-1)))
    }

    pub fn scale(&self, k: &BigInt) -> MPoly {
        let mut r = MPoly::zero(self.nvars);
        if k.is_zero() {
            return r;
        }
        for (e, c) in &self.terms {
            r.terms.insert(e.clone(), c * k);
        }
        r
    }

    pub fn mul(&self, o: &MPoly) -> MPoly {
        assert_eq!(self.nvars, o.nvars);
        let mut r = MPoly::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &o.terms {
                let e = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                r.add_term(e, ca * cb);
            }
        }
        r
    }

    pub fn eval_rational(&self, x: &[BigRational]) -> BigRational {
        assert_eq!(x.len(), self.nvars);
        let mut s = BigRational::zero();
        for (e, c) in &self.terms {
            let mut t = BigRational::from_integer(c.clone());
            for (xi, &k) in x.iter().zip(e) {
                for _ in 0..k {
                    t *= xi;
                }
            }
            s += t;
        }
        s
    }

    pub fn eval_complex(&self, x: &[C64]) -> C64 {
        assert_eq!(x.len(), self.nvars);
        let mut s = C64::new(0.0, 0.0);
        for (e, c) in &self.terms {
            let mut t = C64::new(c.to_f64().unwrap_or(f64::NAN), 0.0);
            for (xi, &k) in x.iter().zip(e) {
                t *= xi.powu(k);
            }
            s += t;
        }
        s
    }
}

impl fmt::Display for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| if k == 1 { format!("L{i}") } else { format!("L{i}^{k}") })
                .collect();
            if mono.is_empty() {
                write!(f, "{a}")?;
            } else if a.is_one() {
                write!(f, "{}", mono.join("*"))?;
            } else {
                write!(f, "{a}*{}", mono.join("*"))?;
            }
        }
        Ok(())
    }
}

/// A univariate polynomial with rational coefficients, lowest degree first,
/// kept without trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QPoly {
    coeffs: Vec<BigRational>,
}

impl QPoly {
    pub fn zero() -> Self {
        QPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: BigRational) -> Self {
        QPoly::new(vec![c])
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    /// The linear polynomial a + b·x.
    pub fn linear(a: BigRational, b: BigRational) -> Self {
        QPoly::new(vec![a, b])
    }

    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        QPoly { coeffs }
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    /// Coefficient of x^k (zero beyond the degree).
    pub fn coeff(&self, k: usize) -> BigRational {
        self.coeffs.get(k).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn add(&self, o: &QPoly) -> QPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        QPoly::new((0..n).map(|k| self.coeff(k) + o.coeff(k)).collect())
    }

    pub fn scale(&self, k: &BigRational) -> QPoly {
        QPoly::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    pub fn mul(&self, o: &QPoly) -> QPoly {
        if self.coeffs.is_empty() || o.coeffs.is_empty() {
            return QPoly::zero();
        }
        let mut r = vec![BigRational::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                r[i + j] += a * b;
            }
        }
        QPoly::new(r)
    }

    /// Rising factorial (a + b·x)_m as a polynomial in x.
    pub fn pochhammer(a: &BigRational, b: &BigRational, m: usize) -> QPoly {
        let mut p = QPoly::one();
        for k in 0..m {
            p = p.mul(&QPoly::linear(a + BigRational::from_integer(k.into()), b.clone()));
        }
        p
    }

    /// Lowest degree at which the two polynomials differ.
    pub fn first_difference(&self, o: &QPoly) -> Option<usize> {
        let n = self.coeffs.len().max(o.coeffs.len());
        (0..n).find(|&k| self.coeff(k) != o.coeff(k))
    }
}

impl fmt::Display for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| match k {
                0 => format!("{c}"),
                1 => format!("({c})x"),
                _ => format!("({c})x^{k}"),
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}
