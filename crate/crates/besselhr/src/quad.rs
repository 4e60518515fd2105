//! Quadrature rules for complex-valued integrands of a real variable:
//! globally adaptive Gauss–Kronrod (7/15) and fixed Gauss–Legendre panels.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::index::C64;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Result of integrating one interval or a whole range.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult {
    pub value: C64,
    pub error: f64,
    /// ∫|f|, the scale against which cancellation is judged.
    pub abs_integral: f64,
    pub evals: usize,
}

/// One 15-point Kronrod rule with the embedded 7-point Gauss estimate.
pub fn gk15<F: FnMut(f64) -> C64>(f: &mut F, a: f64, b: f64) -> QuadResult {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    let mut abs = fc.norm() * WGK[7];
    for i in 0..7 {
        let dx = h * XGK[i];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        k += (f1 + f2) * WGK[i];
        abs += (f1.norm() + f2.norm()) * WGK[i];
        if i % 2 == 1 {
            g += (f1 + f2) * WG[i / 2];
        }
    }
    let value = k * h;
    let error = ((k - g) * h).norm();
    QuadResult { value, error, abs_integral: abs * h.abs(), evals: 15 }
}

#[derive(Clone, Copy, Debug)]
struct Piece {
    a: f64,
    b: f64,
    r: QuadResult,
    seq: usize,
}

impl PartialEq for Piece {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Piece {
    fn cmp(&self, o: &Self) -> Ordering {
        self.r.error.total_cmp(&o.r.error).then(o.seq.cmp(&self.seq))
    }
}

/// Stopping rule for [`adaptive`].
#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub abs: f64,
    /// Relative to the integral of |f| (not of f), so that an integral that
    /// cancels is not refined forever.
    pub rel: f64,
    pub max_evals: usize,
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Tolerance { abs, rel, max_evals: 200_000 }
    }
}

/// Globally adaptive Gauss–Kronrod over `[a, b]`. Deterministic: the final sum
/// is taken over the pieces sorted by position.
pub fn adaptive<F: FnMut(f64) -> C64>(mut f: F, a: f64, b: f64, tol: Tolerance) -> QuadResult {
    let mut heap = BinaryHeap::new();
    let mut seq = 0;
    let first = gk15(&mut f, a, b);
    let mut evals = first.evals;
    let (mut err, mut abs) = (first.error, first.abs_integral);
    heap.push(Piece { a, b, r: first, seq });
    loop {
        if err <= tol.abs.max(tol.rel * abs) || evals >= tol.max_evals {
            break;
        }
        let worst = heap.pop().expect("heap is never empty");
        let m = 0.5 * (worst.a + worst.b);
        if m <= worst.a.min(worst.b) || m >= worst.a.max(worst.b) {
            // interval can no longer be split in floating point
            heap.push(worst);
            break;
        }
        let left = gk15(&mut f, worst.a, m);
        let right = gk15(&mut f, m, worst.b);
        evals += left.evals + right.evals;
        err += left.error + right.error - worst.r.error;
        abs += left.abs_integral + right.abs_integral - worst.r.abs_integral;
        seq += 1;
        heap.push(Piece { a: worst.a, b: m, r: left, seq });
        seq += 1;
        heap.push(Piece { a: m, b: worst.b, r: right, seq });
    }
    let mut pieces = heap.into_vec();
    pieces.sort_by(|p, q| p.a.total_cmp(&q.a));
    let mut total = QuadResult { value: C64::new(0.0, 0.0), error: 0.0, abs_integral: 0.0, evals };
    for p in &pieces {
        total.value += p.r.value;
        total.error += p.r.error;
        total.abs_integral += p.r.abs_integral;
    }
    total
}

/// Gauss–Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p1 = z;
                p0 = 1.0;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_exact_for_polynomials() {
        let r = gk15(&mut |t| C64::new(t.powi(20), 0.0), 0.0, 1.0);
        assert!((r.value.re - 1.0 / 21.0).abs() < 1e-15);
    }

    #[test]
    fn adaptive_oscillatory() {
        // ∫_0^50 e^{it} dt = (e^{50i} − 1)/i
        let r = adaptive(|t| C64::new(0.0, t).exp(), 0.0, 50.0, Tolerance::new(1e-14, 1e-14));
        let want = (C64::new(0.0, 50.0).exp() - 1.0) / C64::i();
        assert!((r.value - want).norm() < 1e-12);
        assert!(r.error < 1e-12);
    }

    #[test]
    fn adaptive_endpoint_singularity() {
        let r = adaptive(|t| C64::new(t.sqrt().recip(), 0.0), 0.0, 1.0, Tolerance::new(1e-10, 1e-12));
        assert!((r.value.re - 2.0).abs() < 1e-8);
    }

    #[test]
    fn legendre_rules() {
        for n in [1, 2, 5, 20, 33] {
            let (x, w) = gauss_legendre(n);
            let s: f64 = w.iter().sum();
            assert!((s - 2.0).abs() < 1e-14, "n={n}");
            let m: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(2 * n as i32 - 2)).sum();
            assert!((m - 2.0 / (2 * n - 1) as f64).abs() < 1e-14, "n={n}");
        }
    }
}
