use std::f64::consts::PI;
use std::path::PathBuf;
use std::time::Instant;

use besselhr::asympt::j_varsigma_asymptotic;
use besselhr::classical;
use besselhr::coeffs::{
    big_lambda, build_b_table, check_combinatorial_identity, rank2_b_closed_form, ATable, NumericUv, UvTables,
};
use besselhr::kernel::{functional_equation_check, mellin_inverse, signed_mellin, KernelIndex, WeightFunction};
use besselhr::mellinbarnes::mb_eval;
use besselhr::series::{j_function, ode_residual, prototype_closed_form};
use besselhr::{RootOfUnity, SignVector, SpectralIndex, SurfacePoint, C64};
use clap::{Args, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::output::{write_json, Header};
use crate::Failure;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    /// A_{j,m} closed form, exact and numeric U/V orthogonality.
    Coeffs,
    /// Rank two against classical Hankel and K functions.
    Rank2,
    /// The prototype index against its closed form.
    Special,
    /// Series, contour integral and asymptotics against each other.
    Crossmethod,
    /// Residual of the Bessel differential equation.
    Ode,
    /// Exponential decay rate of a K-type function.
    Kdecay,
    /// Hankel functional equation and Mellin inversion.
    MellinId,
    /// The exact combinatorial identity behind the stationary-phase coefficients.
    Identity54,
    /// B_m(λ;−1) = (−1)^m B_m(λ;1) and the H-type expansion against the series.
    Bridge,
    /// B_m(λ;ξ) = ξ^{−m}B_m(λ;1) and the rank-two closed form.
    Rotation,
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub suite: Suite,
    /// Rank (suite-dependent default).
    #[arg(long)]
    pub n: Option<usize>,
    /// Largest m for identity54.
    #[arg(long, default_value_t = 8)]
    pub mmax: usize,
    /// Seed for the randomized indices.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

struct Check {
    name: String,
    passed: bool,
    max_deviation: f64,
    threshold: f64,
    runtime_s: f64,
    detail: String,
}

type Measured = Result<(f64, String), besselhr::Error>;

/// Times `f`, which returns the worst deviation found.
fn timed(name: &str, threshold: f64, f: impl FnOnce() -> Measured) -> Check {
    let t = Instant::now();
    let r = f();
    let runtime_s = t.elapsed().as_secs_f64();
    match r {
        Ok((dev, detail)) => Check {
            name: name.into(),
            passed: dev <= threshold,
            max_deviation: dev,
            threshold,
            runtime_s,
            detail,
        },
        Err(e) => Check {
            name: name.into(),
            passed: false,
            max_deviation: f64::INFINITY,
            threshold,
            runtime_s,
            detail: format!("evaluation failed: {e}"),
        },
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm()
}

fn random_index(rng: &mut ChaCha8Rng, n: usize, r: f64) -> SpectralIndex {
    SpectralIndex::new((0..n).map(|_| c(rng.gen_range(-r..r), rng.gen_range(-r..r))).collect()).unwrap()
}

/// Random index with all pairwise differences at least 0.05 away from the integers.
fn generic_index(rng: &mut ChaCha8Rng, n: usize, r: f64) -> SpectralIndex {
    loop {
        let l = random_index(rng, n, r);
        if l.genericity_gap() > 0.05 && l.lambda().iter().all(|z| z.norm() <= r) {
            return l;
        }
    }
}

fn linspace(a: f64, b: f64, k: usize) -> Vec<f64> {
    (0..k).map(|i| a + (b - a) * i as f64 / (k - 1) as f64).collect()
}

fn slope(x: &[f64], y: &[f64]) -> f64 {
    let k = x.len() as f64;
    let mx = x.iter().sum::<f64>() / k;
    let my = y.iter().sum::<f64>() / k;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn rank_range(n: Option<usize>, default_max: usize, cap: usize) -> Result<Vec<usize>, Failure> {
    match n {
        Some(0) => Err(Failure::Usage("--n must be at least 1".into())),
        Some(k) if k > cap => Err(Failure::Usage(format!("--n is limited to {cap} for this suite"))),
        Some(k) => Ok(vec![k]),
        None => Ok((1..=default_max).collect()),
    }
}

fn suite_coeffs(a: &VerifyArgs, rng: &mut ChaCha8Rng) -> Result<Vec<Check>, Failure> {
    let n = a.n.unwrap_or(6);
    if !(1..=8).contains(&n) {
        return Err(Failure::Usage("verify coeffs takes 1 <= n <= 8".into()));
    }
    let mut checks = vec![timed("A closed form, j, m <= 20", 0.0, || {
        let bad = ATable::build(20, 20).closed_form_mismatches();
        Ok((bad.len() as f64, format!("{} mismatching entries", bad.len())))
    })];
    checks.push(timed(&format!("exact U/V orthogonality, n = {n}"), 0.0, || {
        let t = UvTables::build(n);
        let bad = t.orthogonality_failures().len() + t.v_recurrence_failures().len();
        Ok((bad as f64, format!("{bad} failing entries")))
    }));
    let m = n.max(2);
    let lams: Vec<SpectralIndex> = (0..100).map(|_| random_index(rng, m, 2.0)).collect();
    checks.push(timed(&format!("numeric U/V orthogonality, n = {m}, 100 random λ"), 1e-10, || {
        let worst = lams.iter().map(|l| NumericUv::build(&big_lambda(l)).orthogonality_defect()).fold(0.0, f64::max);
        Ok((worst, "relative defect".into()))
    }));
    Ok(checks)
}

fn suite_rank2() -> Vec<Check> {
    [c(0.3, 0.0), c(0.0, 0.5), c(0.2, 0.1)]
        .into_iter()
        .map(|lam| {
            timed(&format!("λ = {lam}, x in [0.5, 20]"), 1e-9, || {
                let idx = SpectralIndex::new(vec![lam, -lam])?;
                let nu = 2.0 * lam;
                let mut worst: f64 = 0.0;
                for x in linspace(0.5, 20.0, 14) {
                    let z = c(2.0 * x, 0.0);
                    let k = classical::bessel_k(nu, z)?;
                    let refs = [
                        ("++", c(0.0, PI) * (c(0.0, PI) * lam).exp() * classical::hankel1(nu, z)?),
                        ("--", c(0.0, -PI) * (c(0.0, -PI) * lam).exp() * classical::hankel2(nu, z)?),
                        ("+-", 2.0 * (c(0.0, -PI) * lam).exp() * k),
                        ("-+", 2.0 * (c(0.0, PI) * lam).exp() * k),
                    ];
                    for (s, want) in refs {
                        let signs = SignVector::parse(s)?;
                        let a = j_function(&SurfacePoint::real(x), &signs, &idx, 1e-12)?;
                        let b = mb_eval(x, &signs, &idx, 1e-12)?;
                        worst = worst.max(rel(a.value, want)).max(rel(b.value, want));
                    }
                }
                Ok((worst, "series and contour integral vs classical".into()))
            })
        })
        .collect()
}

fn suite_special(a: &VerifyArgs) -> Result<Vec<Check>, Failure> {
    let ranks = match a.n {
        Some(n) => rank_range(Some(n), 0, 6)?,
        None => vec![3, 4, 5],
    };
    Ok(ranks
        .into_iter()
        .map(|n| {
            timed(&format!("prototype index, n = {n}, all ς, x in [1, 10]"), 1e-8, || {
                let lam = SpectralIndex::prototype(n);
                let mut worst: f64 = 0.0;
                for s in SignVector::all(n) {
                    for x in linspace(1.0, 10.0, 7) {
                        let v = j_function(&SurfacePoint::real(x), &s, &lam, 1e-12)?;
                        worst = worst.max(rel(v.value, prototype_closed_form(x, &s)));
                    }
                }
                Ok((worst, "relative".into()))
            })
        })
        .collect())
}

fn suite_crossmethod(a: &VerifyArgs, rng: &mut ChaCha8Rng) -> Result<Vec<Check>, Failure> {
    let n = rank_range(Some(a.n.unwrap_or(3)), 0, 4)?[0];
    let lam = generic_index(rng, n, 0.5);
    Ok(SignVector::all(n)
        .into_iter()
        .map(|s| {
            // The allowance is max(1e−7, 2·error estimate); report the worst ratio to it.
            timed(&format!("ς = {s}, λ = {lam}, x in [20, 100]"), 1.0, || {
                let mut worst: f64 = 0.0;
                let mut worst_rel: f64 = 0.0;
                for x in [20.0, 45.0, 70.0, 100.0] {
                    let z = SurfacePoint::real(x);
                    let p = j_function(&z, &s, &lam, 1e-12)?.to_result();
                    let q = mb_eval(x, &s, &lam, 1e-12)?.to_result();
                    let r = j_varsigma_asymptotic(&z, &s, &lam)?.to_result();
                    for (u, v) in [(p, q), (p, r), (q, r)] {
                        let d = rel(u.value, v.value);
                        let allowed = 1e-7_f64.max(2.0 * u.relative_error().max(v.relative_error()));
                        worst = worst.max(d / allowed);
                        worst_rel = worst_rel.max(d);
                    }
                }
                Ok((worst, format!("ratio to allowance; largest relative difference {worst_rel:e}")))
            })
        })
        .collect())
}

fn suite_ode(a: &VerifyArgs, rng: &mut ChaCha8Rng) -> Result<Vec<Check>, Failure> {
    let ranks = rank_range(a.n, 5, 6)?;
    Ok(ranks
        .into_iter()
        .map(|n| {
            let lam = random_index(rng, n, 0.5);
            timed(&format!("n = {n}, λ = {lam}, all ς, x <= 10"), 1e-8, || {
                let mut worst: f64 = 0.0;
                for s in SignVector::all(n) {
                    for x in [0.3, 2.0, 6.5, 10.0] {
                        let (r, scale) = ode_residual(&SurfacePoint::real(x), &s, &lam, 1e-13)?;
                        worst = worst.max(r.norm() / scale);
                    }
                }
                Ok((worst, "residual relative to the sum of its terms".into()))
            })
        })
        .collect())
}

fn suite_kdecay(a: &VerifyArgs, rng: &mut ChaCha8Rng) -> Result<Vec<Check>, Failure> {
    let n = a.n.unwrap_or(3);
    if !(2..=5).contains(&n) {
        return Err(Failure::Usage("verify kdecay takes 2 <= n <= 5".into()));
    }
    let lam = generic_index(rng, n, 0.3);
    let s = SignVector::new((0..n).map(|l| if l + 1 < n { 1 } else { -1 }).collect()).unwrap();
    let target = -(n as f64) * s.decay_rate();
    Ok(vec![timed(&format!("ς = {s}, λ = {lam}, slope over x in [30, 60]"), 0.02, || {
        let xs = linspace(30.0, 60.0, 7);
        let mut ys = Vec::new();
        for &x in &xs {
            ys.push(j_function(&SurfacePoint::real(x), &s, &lam, 1e-10)?.value.norm().ln());
        }
        let fitted = slope(&xs, &ys);
        Ok(((fitted - target).abs() / target.abs(), format!("fitted slope {fitted:.5}, expected {target:.5}")))
    })])
}

fn suite_mellin() -> Vec<Check> {
    let cases = [
        (vec![c(0.1, 0.2), c(-0.1, -0.2)], vec![0u8, 1]),
        (vec![c(0.2, 0.0), c(0.0, 0.3), c(-0.2, -0.3)], vec![1, 0, 0]),
    ];
    let s_values = [c(0.5, 0.0), c(0.5, 1.0), c(0.5, 2.0)];
    let mut checks = Vec::new();
    for (lam, delta) in cases {
        for eta in [0u8, 1] {
            let name = format!("functional equation, n = {}, δ = {delta:?}, η = {eta}", lam.len());
            let (lam, delta) = (lam.clone(), delta.clone());
            checks.push(timed(&name, 1e-6, move || {
                let idx = KernelIndex::new(SpectralIndex::new(lam)?, delta)?;
                let v = WeightFunction::gaussian_log(0.0, 0.25, eta)?;
                let fe = functional_equation_check(&v, &idx, &s_values, 1e-8)?;
                Ok((fe.iter().map(|f| f.relative_error()).fold(0.0, f64::max), "s = 1/2, 1/2 + i, 1/2 + 2i".into()))
            }));
        }
    }
    checks.push(timed("Mellin inversion round trip", 1e-7, || {
        let v = WeightFunction::gaussian_log(0.3, 0.8, 1)?;
        let mut worst: f64 = 0.0;
        for s in [c(0.5, 0.0), c(1.0, 2.0)] {
            let num = signed_mellin(&v, 1, s, 1e-13);
            worst = worst.max(rel(num, v.mellin_closed_form(1, s).unwrap()));
        }
        for x in [-2.0, 0.5, 1.7] {
            let back = mellin_inverse(|d, s| v.mellin_closed_form(d, s).unwrap(), x, 0.5, 40.0, 1e-12);
            worst = worst.max((back - v.eval(x)).norm());
        }
        Ok((worst, "quadrature vs closed form, and inversion".into()))
    }));
    checks
}

fn suite_identity(a: &VerifyArgs) -> Result<Vec<Check>, Failure> {
    if a.mmax > 30 {
        return Err(Failure::Usage("--mmax is limited to 30".into()));
    }
    let reports = check_combinatorial_identity(a.mmax);
    Ok(reports
        .into_iter()
        .map(|r| Check {
            name: format!("m = {}", r.m),
            passed: r.holds,
            max_deviation: if r.holds { 0.0 } else { 1.0 },
            threshold: 0.0,
            runtime_s: 0.0,
            detail: match r.first_difference {
                Some(d) => format!("sides differ at degree {d}"),
                None => "exact polynomial equality".into(),
            },
        })
        .collect())
}

fn suite_bridge(a: &VerifyArgs, rng: &mut ChaCha8Rng) -> Result<Vec<Check>, Failure> {
    let ranks = rank_range(a.n, 5, 8)?;
    let mut checks = Vec::new();
    for &n in &ranks {
        let lam = random_index(rng, n, 0.5);
        checks.push(timed(&format!("B_m(λ;−1) = (−1)^m B_m(λ;1), n = {n}, m <= 15"), 1e-12, || {
            let plus = build_b_table(&lam, &RootOfUnity::one(n), 15);
            let minus = build_b_table(&lam, &RootOfUnity::minus_one(n), 15);
            let worst = (0..=15)
                .map(|m| {
                    let want = plus.get(m) * if m % 2 == 0 { 1.0 } else { -1.0 };
                    (minus.get(m) - want).norm() / want.norm().max(1e-300)
                })
                .fold(0.0, f64::max);
            Ok((worst, format!("λ = {lam}")))
        }));
    }
    let n = ranks.iter().copied().filter(|&n| n >= 2).max().unwrap_or(2).min(4);
    let lam = generic_index(rng, n, 0.4);
    checks.push(timed(&format!("H-type expansion vs series, n = {n}, x in {{20, 30, 40}}"), 1e-7, || {
        let mut worst: f64 = 0.0;
        for sign in [1, -1] {
            let s = SignVector::all_equal(n, sign);
            for x in [20.0, 30.0, 40.0] {
                let z = SurfacePoint::real(x);
                let a = j_varsigma_asymptotic(&z, &s, &lam)?;
                let b = j_function(&z, &s, &lam, 1e-13)?;
                worst = worst.max(rel(a.value, b.value));
            }
        }
        Ok((worst, format!("λ = {lam}")))
    }));
    Ok(checks)
}

fn suite_rotation(a: &VerifyArgs, rng: &mut ChaCha8Rng) -> Result<Vec<Check>, Failure> {
    let ranks = rank_range(a.n, 5, 8)?;
    let mut checks = Vec::new();
    for n in ranks {
        let lam = random_index(rng, n, 0.5);
        checks.push(timed(&format!("B_m(λ;ξ) = ξ^(−m) B_m(λ;1), n = {n}, all 2n-th roots, m <= 15"), 1e-12, || {
            let base = build_b_table(&lam, &RootOfUnity::one(n), 15);
            let mut worst: f64 = 0.0;
            for k in 1..2 * n as i64 {
                let xi = RootOfUnity::new(n, k);
                let t = build_b_table(&lam, &xi, 15);
                for m in 0..=15 {
                    let want = base.get(m) * xi.value().powi(-(m as i32));
                    worst = worst.max((t.get(m) - want).norm() / want.norm().max(1e-300));
                }
            }
            Ok((worst, format!("λ = {lam}")))
        }));
    }
    let lams: Vec<C64> = (0..50).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    checks.push(timed("rank-two closed form, 50 random λ, m <= 12", 1e-12, || {
        let mut worst: f64 = 0.0;
        for &lam in &lams {
            let idx = SpectralIndex::new(vec![lam, -lam])?;
            for xi in [RootOfUnity::one(2), RootOfUnity::minus_one(2)] {
                let t = build_b_table(&idx, &xi, 12);
                for m in 0..=12 {
                    let want = rank2_b_closed_form(lam, xi.value(), m);
                    worst = worst.max((t.get(m) - want).norm() / want.norm().max(1e-300));
                }
            }
        }
        Ok((worst, "Pochhammer products".into()))
    }));
    Ok(checks)
}

pub fn run(a: VerifyArgs) -> Result<(), Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let t = Instant::now();
    let checks = match a.suite {
        Suite::Coeffs => suite_coeffs(&a, &mut rng)?,
        Suite::Rank2 => suite_rank2(),
        Suite::Special => suite_special(&a)?,
        Suite::Crossmethod => suite_crossmethod(&a, &mut rng)?,
        Suite::Ode => suite_ode(&a, &mut rng)?,
        Suite::Kdecay => suite_kdecay(&a, &mut rng)?,
        Suite::MellinId => suite_mellin(),
        Suite::Identity54 => suite_identity(&a)?,
        Suite::Bridge => suite_bridge(&a, &mut rng)?,
        Suite::Rotation => suite_rotation(&a, &mut rng)?,
    };
    let passed = checks.iter().all(|c| c.passed);
    let worst = checks.iter().map(|c| c.max_deviation).fold(0.0, f64::max);
    let body = json!({
        "suite": a.suite,
        "status": if passed { "pass" } else { "fail" },
        "max_deviation": worst,
        "runtime_s": t.elapsed().as_secs_f64(),
        "checks": checks.iter().map(|c| json!({
            "name": c.name,
            "status": if c.passed { "pass" } else { "fail" },
            "max_deviation": c.max_deviation,
            "threshold": c.threshold,
            "runtime_s": c.runtime_s,
            "detail": c.detail,
        })).collect::<Vec<_>>(),
    });
    write_json(a.out.as_deref(), &Header::new("verify", &a), body)?;
    if passed {
        Ok(())
    } else {
        let failed = checks.iter().filter(|c| !c.passed).count();
        Err(Failure::Verification(format!("{failed} of {} checks failed", checks.len())))
    }
}
