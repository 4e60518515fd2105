//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Run with `cargo test -p besselhr --test acceptance`.

use std::f64::consts::PI;
use std::time::Instant;

use besselhr::asympt::j_varsigma_asymptotic;
use besselhr::classical;
use besselhr::coeffs::{
    big_lambda, build_b_table, check_combinatorial_identity, rank2_b_closed_form, ATable, NumericUv, UvTables,
};
use besselhr::kernel::{bessel_kernel, functional_equation_check, KernelIndex, KernelMethod, WeightFunction};
use besselhr::mellinbarnes::mb_eval;
use besselhr::series::{j_function, ode_residual, prototype_closed_form};
use besselhr::{RootOfUnity, SignVector, SpectralIndex, SurfacePoint, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm()
}

fn linspace(a: f64, b: f64, k: usize) -> Vec<f64> {
    (0..k).map(|i| a + (b - a) * i as f64 / (k - 1) as f64).collect()
}

/// Least-squares slope of y against x.
fn slope(x: &[f64], y: &[f64]) -> f64 {
    let k = x.len() as f64;
    let mx = x.iter().sum::<f64>() / k;
    let my = y.iter().sum::<f64>() / k;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn coefficient_exactness() -> Outcome {
    let bad = ATable::build(20, 20).closed_form_mismatches();
    check(bad.is_empty(), format!("{} mismatches for j, m <= 20", bad.len()))
}

fn orthogonality() -> Outcome {
    for n in 1..=6 {
        let bad = UvTables::build(n).orthogonality_failures();
        if !bad.is_empty() {
            return Err(format!("n={n}: exact failures at {bad:?}"));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for n in 2..=8 {
        for _ in 0..100 {
            let mut l: Vec<C64> = (0..n).map(|_| c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))).collect();
            let mean = l.iter().sum::<C64>() / n as f64;
            l.iter_mut().for_each(|z| *z -= mean);
            let idx = SpectralIndex::new(l).map_err(|e| e.to_string())?;
            worst = worst.max(NumericUv::build(&big_lambda(&idx)).orthogonality_defect());
        }
    }
    check(worst < 1e-10, format!("exact for n <= 6; numeric defect {worst:.1e} over 100 random λ for n <= 8"))
}

fn rank_one() -> Outcome {
    let lam = SpectralIndex::zero(1);
    let mut worst: f64 = 0.0;
    for x in linspace(0.1, 50.0, 50) {
        for (s, sign) in [("+", 1.0), ("-", -1.0)] {
            let v = mb_eval(x, &SignVector::parse(s).unwrap(), &lam, 1e-13).map_err(|e| e.to_string())?;
            worst = worst.max((v.value - c(0.0, sign * x).exp()).norm());
        }
    }
    check(worst < 1e-10, format!("max |J - e^(±ix)| = {worst:.1e}"))
}

fn rank_two() -> Outcome {
    let mut worst: f64 = 0.0;
    for lam in [c(0.3, 0.0), c(0.0, 0.5), c(0.2, 0.1)] {
        let idx = SpectralIndex::new(vec![lam, -lam]).unwrap();
        let nu = 2.0 * lam;
        for x in linspace(0.5, 20.0, 14) {
            let z = c(2.0 * x, 0.0);
            let k = classical::bessel_k(nu, z).map_err(|e| e.to_string())?;
            let refs = [
                ("++", c(0.0, PI) * (c(0.0, PI) * lam).exp() * classical::hankel1(nu, z).map_err(|e| e.to_string())?),
                ("--", c(0.0, -PI) * (c(0.0, -PI) * lam).exp() * classical::hankel2(nu, z).map_err(|e| e.to_string())?),
                ("+-", 2.0 * (c(0.0, -PI) * lam).exp() * k),
                ("-+", 2.0 * (c(0.0, PI) * lam).exp() * k),
            ];
            for (s, want) in refs {
                let signs = SignVector::parse(s).unwrap();
                let a = j_function(&SurfacePoint::real(x), &signs, &idx, 1e-12).map_err(|e| e.to_string())?;
                let b = mb_eval(x, &signs, &idx, 1e-12).map_err(|e| e.to_string())?;
                worst = worst.max(rel(a.value, want)).max(rel(b.value, want));
            }
        }
    }
    check(worst < 1e-9, format!("series and contour vs classical: max rel {worst:.1e}"))
}

fn prototype() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in 3..=5 {
        let lam = SpectralIndex::prototype(n);
        for s in SignVector::all(n) {
            for x in linspace(1.0, 10.0, 7) {
                let v = j_function(&SurfacePoint::real(x), &s, &lam, 1e-12).map_err(|e| e.to_string())?;
                worst = worst.max(rel(v.value, prototype_closed_form(x, &s)));
            }
        }
    }
    check(worst < 1e-8, format!("max rel {worst:.1e}"))
}

fn three_way() -> Outcome {
    let lam = SpectralIndex::new(vec![c(0.3, 0.1), c(-0.1, -0.25), c(-0.2, 0.15)]).unwrap();
    let mut worst: f64 = 0.0;
    for s in SignVector::all(3) {
        for x in [20.0, 45.0, 70.0, 100.0] {
            let z = SurfacePoint::real(x);
            let a = j_function(&z, &s, &lam, 1e-12).map_err(|e| e.to_string())?.to_result();
            let b = mb_eval(x, &s, &lam, 1e-12).map_err(|e| e.to_string())?.to_result();
            let d = j_varsigma_asymptotic(&z, &s, &lam).map_err(|e| e.to_string())?.to_result();
            for (p, q) in [(a, b), (a, d), (b, d)] {
                let r = rel(p.value, q.value);
                let allowed = 1e-7_f64.max(2.0 * p.relative_error().max(q.relative_error()));
                if r >= allowed {
                    return Err(format!("ς={s} x={x}: {} vs {} differ by {r:.1e}", p.method.as_str(), q.method.as_str()));
                }
                worst = worst.max(r);
            }
        }
    }
    check(true, format!("all 8 ς, x in [20, 100]; max pairwise rel {worst:.1e}"))
}

fn ode() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in 1..=5 {
        let mut l: Vec<C64> = (0..n).map(|_| c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5))).collect();
        let mean = l.iter().sum::<C64>() / n as f64;
        l.iter_mut().for_each(|z| *z -= mean);
        let lam = SpectralIndex::new(l).unwrap();
        for s in SignVector::all(n) {
            for x in [0.3, 2.0, 6.5, 10.0] {
                let (r, scale) = ode_residual(&SurfacePoint::real(x), &s, &lam, 1e-13).map_err(|e| e.to_string())?;
                worst = worst.max(r.norm() / scale);
            }
        }
    }
    check(worst < 1e-8, format!("max relative residual {worst:.1e}"))
}

fn identity() -> Outcome {
    let reports = check_combinatorial_identity(8);
    match reports.iter().find(|r| !r.holds) {
        Some(r) => Err(format!("fails at m={} (degree {:?})", r.m, r.first_difference)),
        None => Ok(format!("exact for m <= {}", reports.iter().map(|r| r.m).max().unwrap_or(0))),
    }
}

fn rotation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for n in 1..=5 {
        let mut l: Vec<C64> = (0..n).map(|_| c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5))).collect();
        let mean = l.iter().sum::<C64>() / n as f64;
        l.iter_mut().for_each(|z| *z -= mean);
        let lam = SpectralIndex::new(l).unwrap();
        let base = build_b_table(&lam, &RootOfUnity::one(n), 15);
        for k in (2..2 * n as i64).step_by(2) {
            let xi = RootOfUnity::new(n, k);
            let t = build_b_table(&lam, &xi, 15);
            for m in 0..=15 {
                let want = base.get(m) * xi.value().powi(-(m as i32));
                worst = worst.max((t.get(m) - want).norm() / want.norm().max(1e-300));
            }
        }
    }
    let mut worst2: f64 = 0.0;
    for lam in [c(0.3, 0.0), c(0.1, 0.4)] {
        let idx = SpectralIndex::new(vec![lam, -lam]).unwrap();
        for xi in [RootOfUnity::one(2), RootOfUnity::minus_one(2)] {
            let t = build_b_table(&idx, &xi, 15);
            for m in 0..=15 {
                let want = rank2_b_closed_form(lam, xi.value(), m);
                worst2 = worst2.max((t.get(m) - want).norm() / want.norm());
            }
        }
    }
    check(worst < 1e-12 && worst2 < 1e-12, format!("rotation {worst:.1e}, rank-2 closed form {worst2:.1e}"))
}

fn k_decay() -> Outcome {
    let lam = SpectralIndex::new(vec![c(0.2, 0.1), c(-0.3, 0.05), c(0.1, -0.15)]).unwrap();
    let s = SignVector::parse("++-").unwrap();
    let xs = linspace(30.0, 60.0, 7);
    let mut ys = Vec::new();
    for &x in &xs {
        let v = j_function(&SurfacePoint::real(x), &s, &lam, 1e-10).map_err(|e| e.to_string())?;
        ys.push(v.value.norm().ln());
    }
    let fitted = slope(&xs, &ys);
    let target = -3.0 * (PI / 3.0).sin();
    let dev = (fitted - target).abs() / target.abs();
    check(dev < 0.02, format!("slope {fitted:.4} vs {target:.4} ({:.2}%)", 100.0 * dev))
}

fn functional_equation() -> Outcome {
    let cases = [
        (vec![c(0.1, 0.2), c(-0.1, -0.2)], vec![0u8, 1]),
        (vec![c(0.2, 0.0), c(0.0, 0.3), c(-0.2, -0.3)], vec![1, 0, 0]),
    ];
    let s_values = [c(0.5, 0.0), c(0.5, 1.0), c(0.5, 2.0)];
    let mut worst: f64 = 0.0;
    for (lam, delta) in cases {
        let idx = KernelIndex::new(SpectralIndex::new(lam).unwrap(), delta).unwrap();
        for eta in [0u8, 1] {
            let v = WeightFunction::gaussian_log(0.0, 0.25, eta).unwrap();
            let fe = functional_equation_check(&v, &idx, &s_values, 1e-8).map_err(|e| e.to_string())?;
            for f in fe {
                worst = worst.max(f.relative_error());
            }
        }
    }
    check(worst < 1e-6, format!("n = 2, 3; both parities; max rel {worst:.1e}"))
}

fn kernel_parity() -> Outcome {
    let mut worst = f64::INFINITY;
    for delta in [vec![0u8, 0], vec![1, 0]] {
        let idx = KernelIndex::new(SpectralIndex::new(vec![c(0.2, 0.3), c(-0.2, -0.3)]).unwrap(), delta).unwrap();
        let xs = linspace(3.0, 6.0, 7);
        let mut ys = Vec::new();
        for &x in &xs {
            let v = bessel_kernel(-x * x, &idx, KernelMethod::Auto, 1e-10).map_err(|e| e.to_string())?;
            ys.push(v.result.value.norm().ln());
        }
        worst = worst.min(-slope(&xs, &ys));
    }
    let target = 0.9 * 4.0 * PI;
    check(worst >= target, format!("decay rate {worst:.3} (need >= {target:.3})"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("coefficient exactness", coefficient_exactness),
        ("orthogonality", orthogonality),
        ("rank one", rank_one),
        ("rank two closed forms", rank_two),
        ("prototype index", prototype),
        ("three-way agreement", three_way),
        ("ODE residual", ode),
        ("combinatorial identity", identity),
        ("coefficient rotation", rotation),
        ("K-decay", k_decay),
        ("functional equation", functional_equation),
        ("kernel parity", kernel_parity),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let out = f();
        let secs = t.elapsed().as_secs_f64();
        match out {
            Ok(d) => println!("criterion {:>2} PASS  {name}: {d} [{secs:.2}s]", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {d} [{secs:.2}s]", i + 1)
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
