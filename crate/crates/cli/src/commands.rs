use besselhr::coeffs::{build_b_table, ATable, UvTables, B_MAX_TERMS};
use besselhr::kernel::{self, KernelIndex, KernelMethod, WeightFunction};
use besselhr::{asympt, series, Method, RootOfUnity, SignVector, SpectralIndex, SurfacePoint};
use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{parse_complex_list, parse_delta, parse_grid, parse_signs, IndexArgs};
use crate::output::{complex, num, write_csv, write_json, write_table, Format, Header, Point, Row};
use crate::{Failure, OutArgs};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Auto,
    Series,
    Asympt,
    Mb,
}

impl MethodArg {
    fn name(self) -> &'static str {
        match self {
            MethodArg::Auto => "auto",
            MethodArg::Series => "series",
            MethodArg::Asympt => "asympt",
            MethodArg::Mb => "mb",
        }
    }

    fn kernel_method(self) -> KernelMethod {
        match self {
            MethodArg::Auto => KernelMethod::Auto,
            MethodArg::Series => KernelMethod::Fixed(Method::Series),
            MethodArg::Asympt => KernelMethod::Fixed(Method::Asymptotic),
            MethodArg::Mb => KernelMethod::Fixed(Method::MellinBarnes),
        }
    }
}

fn check_tol(tol: f64) -> Result<(), Failure> {
    if tol > 0.0 && tol < 1.0 {
        Ok(())
    } else {
        Err(Failure::Usage(format!("--tol must lie in (0, 1), got {tol}")))
    }
}

/// Fails with exit code 3 after the table has been written, if any row failed.
fn numeric_status(rows: &[Row]) -> Result<(), Failure> {
    let bad = rows.iter().filter(|r| r.failed()).count();
    if bad == 0 {
        Ok(())
    } else {
        Err(Failure::Numeric(format!("{bad} of {} points failed; see the err column", rows.len())))
    }
}

#[derive(Args, Debug, Serialize)]
pub struct EvalArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub index: IndexArgs,
    /// Sign vector ς, e.g. `++-`.
    #[arg(long, allow_hyphen_values = true)]
    pub signs: String,
    /// Moduli |z|: a number, a list, or `log:a:b:k` / `lin:a:b:k`.
    #[arg(long)]
    pub x: String,
    /// Argument ω of z = |z|e^{iω} on the universal cover.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub arg: f64,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    pub method: MethodArg,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutArgs,
}

fn eval_point(
    x: f64,
    arg: f64,
    signs: &SignVector,
    lam: &SpectralIndex,
    method: MethodArg,
    tol: f64,
) -> besselhr::Result<besselhr::EvalResult> {
    if arg == 0.0 {
        return kernel::j_real(x, signs, lam, method.kernel_method(), tol);
    }
    let z = SurfacePoint::new(x, arg);
    match method {
        MethodArg::Series => Ok(series::j_function(&z, signs, lam, tol)?.to_result()),
        MethodArg::Asympt => Ok(asympt::j_varsigma_asymptotic(&z, signs, lam)?.to_result()),
        MethodArg::Mb => unreachable!("rejected before evaluation"),
        MethodArg::Auto => {
            if let Ok(a) = asympt::j_varsigma_asymptotic(&z, signs, lam) {
                if a.error_estimate <= tol * a.value.norm() {
                    return Ok(a.to_result());
                }
            }
            Ok(series::j_function(&z, signs, lam, tol)?.to_result())
        }
    }
}

pub fn eval(a: EvalArgs) -> Result<(), Failure> {
    let signs = parse_signs(&a.signs)?;
    let lam = a.index.resolve(Some(signs.rank()), None)?;
    let xs = parse_grid(&a.x)?;
    check_tol(a.tol)?;
    if xs.iter().any(|&x| x <= 0.0) {
        return Err(Failure::Usage("--x takes moduli, which must be positive".into()));
    }
    if a.arg != 0.0 && a.method == MethodArg::Mb {
        return Err(Failure::Usage("the contour integral is implemented on the positive axis only (--arg 0)".into()));
    }
    let rows: Vec<Row> = xs
        .par_iter()
        .map(|&x| Row {
            x,
            outcome: eval_point(x, a.arg, &signs, &lam, a.method, a.tol)
                .map(|r| Point { value: r.value, err: r.error_estimate, method: r.method.as_str(), cancellation: None })
                .map_err(|e| e.to_string()),
        })
        .collect();
    let header = Header::new("eval", &a);
    write_table(a.out.out.as_deref(), a.format, &header, &rows)?;
    numeric_status(&rows)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Table {
    /// Asymptotic coefficients B_m(λ;ξ), m = 0..terms.
    B,
    /// The integers A_{j,m}, j, m = 0..terms.
    A,
    /// The polynomials U_{k,j}, V_{k,j} in Λ_0..Λ_{n−1}.
    Uv,
}

#[derive(Args, Debug, Serialize)]
pub struct CoeffsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub index: IndexArgs,
    /// 2n-th root of unity: `1`, `-1`, `i`, `-i` or `k/2n`.
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    pub xi: String,
    #[arg(long, default_value_t = 10)]
    pub terms: usize,
    #[arg(long, value_enum, default_value_t = Table::B)]
    pub table: Table,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutArgs,
}

pub fn coeffs(a: CoeffsArgs) -> Result<(), Failure> {
    let header = Header::new("coeffs", &a);
    let out = a.out.out.as_deref();
    match a.table {
        Table::B => {
            let lam = a.index.resolve(None, None)?;
            let n = lam.rank();
            let xi = RootOfUnity::parse(n, &a.xi).map_err(|e| Failure::Usage(e.to_string()))?;
            if a.terms > B_MAX_TERMS {
                return Err(Failure::Usage(format!("--terms is capped at {B_MAX_TERMS}")));
            }
            let t = build_b_table(&lam, &xi, a.terms);
            match a.format {
                Format::Json => write_json(
                    out,
                    &header,
                    json!({
                        "n": n,
                        "lambda": lam.lambda().iter().map(|&z| complex(z)).collect::<Vec<_>>(),
                        "xi": xi.to_string(),
                        "b": (0..=a.terms).map(|m| json!({ "m": m, "value": complex(t.get(m)) })).collect::<Vec<_>>(),
                    }),
                ),
                Format::Csv => {
                    let rows: Vec<Vec<String>> =
                        (0..=a.terms).map(|m| vec![m.to_string(), num(t.get(m).re), num(t.get(m).im)]).collect();
                    write_csv(out, &header, &["m", "Re", "Im"], &rows)
                }
            }
        }
        Table::A => {
            let t = ATable::build(a.terms, a.terms);
            match a.format {
                Format::Json => {
                    let rows: Vec<Vec<String>> =
                        t.rows().iter().map(|r| r.iter().map(|v| v.to_string()).collect()).collect();
                    write_json(out, &header, json!({ "a": rows }))
                }
                Format::Csv => {
                    let mut rows = Vec::new();
                    for j in 0..=a.terms {
                        for m in 0..=a.terms {
                            rows.push(vec![j.to_string(), m.to_string(), t.get(j, m).to_string()]);
                        }
                    }
                    write_csv(out, &header, &["j", "m", "A"], &rows)
                }
            }
        }
        Table::Uv => {
            let n = a.index.resolve(None, None)?.rank();
            if n > 8 {
                return Err(Failure::Usage("exact U/V tables are limited to n <= 8".into()));
            }
            let t = UvTables::build(n);
            let mut rows = Vec::new();
            for k in 0..=n {
                for j in 0..=k {
                    rows.push(vec![k.to_string(), j.to_string(), t.u(k, j).to_string(), t.v(k, j).to_string()]);
                }
            }
            match a.format {
                Format::Json => {
                    let entries: Vec<Value> =
                        rows.iter().map(|r| json!({ "k": r[0], "j": r[1], "u": r[2], "v": r[3] })).collect();
                    write_json(out, &header, json!({ "n": n, "entries": entries }))
                }
                Format::Csv => write_csv(out, &header, &["k", "j", "U", "V"], &rows),
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Plus,
    Minus,
    Both,
}

#[derive(Args, Debug, Serialize)]
pub struct KernelArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub index: IndexArgs,
    /// Parities δ, e.g. `0,1`. Defaults to all zeros.
    #[arg(long)]
    pub delta: Option<String>,
    /// Grid of |x|.
    #[arg(long, default_value = "log:0.1:100:200")]
    pub x_grid: String,
    /// Evaluate at +x, −x or both.
    #[arg(long, value_enum, default_value_t = Side::Plus)]
    pub side: Side,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    pub method: MethodArg,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutArgs,
}

fn kernel_index(index: &IndexArgs, delta: Option<&str>) -> Result<KernelIndex, Failure> {
    let delta = delta.map(parse_delta).transpose()?;
    let lam = index.resolve(delta.as_ref().map(Vec::len), Some(2))?;
    let delta = delta.unwrap_or_else(|| vec![0; lam.rank()]);
    Ok(KernelIndex::new(lam, delta)?)
}

fn signed_grid(grid: &str, side: Side) -> Result<Vec<f64>, Failure> {
    let xs = parse_grid(grid)?;
    if xs.iter().any(|&x| x <= 0.0) {
        return Err(Failure::Usage("grid points must be positive; use --side for −x".into()));
    }
    Ok(match side {
        Side::Plus => xs,
        Side::Minus => xs.iter().map(|x| -x).collect(),
        Side::Both => xs.iter().rev().map(|x| -x).chain(xs.iter().copied()).collect(),
    })
}

pub fn kernel(a: KernelArgs) -> Result<(), Failure> {
    let idx = kernel_index(&a.index, a.delta.as_deref())?;
    let xs = signed_grid(&a.x_grid, a.side)?;
    check_tol(a.tol)?;
    let method = a.method.kernel_method();
    let rows: Vec<Row> = xs
        .par_iter()
        .map(|&x| Row {
            x,
            outcome: kernel::bessel_kernel(x, &idx, method, a.tol)
                .map(|k| Point {
                    value: k.result.value,
                    err: k.result.error_estimate,
                    method: k.result.method.as_str(),
                    cancellation: Some(k.cancellation),
                })
                .map_err(|e| e.to_string()),
        })
        .collect();
    let header = Header::new("kernel", &a);
    write_table(a.out.out.as_deref(), a.format, &header, &rows)?;
    numeric_status(&rows)
}

#[derive(Args, Debug, Serialize)]
pub struct TransformArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub index: IndexArgs,
    #[arg(long)]
    pub delta: Option<String>,
    /// `gaussian-log:η=0,μ=0,w=0.25` (all parameters optional).
    #[arg(long, default_value = "gaussian-log:η=0")]
    pub weight: String,
    #[arg(long, default_value = "log:0.1:10:40")]
    pub x_grid: String,
    #[arg(long, value_enum, default_value_t = Side::Plus)]
    pub side: Side,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Emit the functional-equation residuals at --s instead of the table.
    #[arg(long)]
    pub fe: bool,
    /// Test points for --fe.
    #[arg(long, default_value = "0.5,0.5+1i,0.5+2i", allow_hyphen_values = true)]
    pub s: String,
    /// Largest relative residual accepted by --fe.
    #[arg(long, default_value_t = 1e-6)]
    pub fe_threshold: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutArgs,
}

pub fn transform(a: TransformArgs) -> Result<(), Failure> {
    let idx = kernel_index(&a.index, a.delta.as_deref())?;
    let v: WeightFunction = a.weight.parse()?;
    check_tol(a.tol)?;
    let header = Header::new("transform", &a);
    let out = a.out.out.as_deref();
    if a.fe {
        let s = parse_complex_list(&a.s)?;
        let fe = kernel::functional_equation_check(&v, &idx, &s, a.tol)?;
        let worst = fe.iter().map(|f| f.relative_error()).fold(0.0, f64::max);
        let pass = worst <= a.fe_threshold;
        let checks: Vec<Value> = fe
            .iter()
            .map(|f| {
                json!({
                    "s": complex(f.s),
                    "delta": f.delta,
                    "lhs": complex(f.lhs),
                    "rhs": complex(f.rhs),
                    "relative_error": f.relative_error(),
                })
            })
            .collect();
        write_json(
            out,
            &header,
            json!({
                "status": if pass { "pass" } else { "fail" },
                "max_deviation": worst,
                "threshold": a.fe_threshold,
                "checks": checks,
            }),
        )?;
        return if pass {
            Ok(())
        } else {
            Err(Failure::Verification(format!("functional equation residual {worst:e} > {:e}", a.fe_threshold)))
        };
    }
    let xs = signed_grid(&a.x_grid, a.side)?;
    // one call, so the kernel table is shared by the whole grid
    let rows: Vec<Row> = match kernel::hankel_transform(&v, &idx, &xs, a.tol) {
        Ok(r) => xs
            .iter()
            .zip(r)
            .map(|(&x, r)| Row {
                x,
                outcome: Ok(Point { value: r.value, err: r.error_estimate, method: "quadrature", cancellation: None }),
            })
            .collect(),
        Err(e) => xs.iter().map(|&x| Row { x, outcome: Err(e.to_string()) }).collect(),
    };
    write_table(out, a.format, &header, &rows)?;
    numeric_status(&rows)
}

#[derive(Args, Debug, Serialize)]
pub struct CompareArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub index: IndexArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub signs: String,
    /// Comma-separated subset of series, mb, asympt.
    #[arg(long, default_value = "series,mb,asympt")]
    pub methods: String,
    #[arg(long, default_value = "lin:20:100:9")]
    pub grid: String,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutArgs,
}

pub fn compare(a: CompareArgs) -> Result<(), Failure> {
    let signs = parse_signs(&a.signs)?;
    let lam = a.index.resolve(Some(signs.rank()), None)?;
    let xs = parse_grid(&a.grid)?;
    check_tol(a.tol)?;
    if xs.iter().any(|&x| x <= 0.0) {
        return Err(Failure::Usage("grid points must be positive".into()));
    }
    let methods: Vec<MethodArg> = a
        .methods
        .split(',')
        .map(|m| match m.trim() {
            "series" => Ok(MethodArg::Series),
            "mb" => Ok(MethodArg::Mb),
            "asympt" => Ok(MethodArg::Asympt),
            other => Err(Failure::Usage(format!("unknown method {other:?}"))),
        })
        .collect::<Result<_, _>>()?;
    if methods.len() < 2 {
        return Err(Failure::Usage("compare needs at least two methods".into()));
    }
    let name = |m: MethodArg| m.name();
    let mut columns = vec!["x".to_string()];
    for &m in &methods {
        columns.extend([format!("Re_{}", name(m)), format!("Im_{}", name(m)), format!("err_{}", name(m))]);
    }
    let mut pairs = Vec::new();
    for i in 0..methods.len() {
        for j in i + 1..methods.len() {
            pairs.push((i, j));
            columns.push(format!("rel_{}_{}", name(methods[i]), name(methods[j])));
        }
    }
    columns.push("notes".into());
    let results: Vec<Vec<Result<besselhr::EvalResult, String>>> = xs
        .par_iter()
        .map(|&x| {
            methods
                .iter()
                .map(|&m| kernel::j_real(x, &signs, &lam, m.kernel_method(), a.tol).map_err(|e| e.to_string()))
                .collect()
        })
        .collect();
    let mut rows = Vec::new();
    let mut failures = 0;
    for (x, res) in xs.iter().zip(&results) {
        let mut row = vec![num(*x)];
        let mut notes = Vec::new();
        for (m, r) in methods.iter().zip(res) {
            match r {
                Ok(v) => row.extend([num(v.value.re), num(v.value.im), num(v.error_estimate)]),
                Err(e) => {
                    failures += 1;
                    notes.push(format!("{}: {e}", name(*m)));
                    row.extend(["NaN".to_string(), "NaN".to_string(), "NaN".to_string()]);
                }
            }
        }
        for &(i, j) in &pairs {
            row.push(match (&res[i], &res[j]) {
                (Ok(p), Ok(q)) => num((p.value - q.value).norm() / q.value.norm()),
                _ => "NaN".into(),
            });
        }
        row.push(notes.join("; "));
        rows.push(row);
    }
    let header = Header::new("oracle compare", &a);
    let cols: Vec<&str> = columns.iter().map(String::as_str).collect();
    write_csv(a.out.out.as_deref(), &header, &cols, &rows)?;
    if failures > 0 {
        return Err(Failure::Numeric(format!("{failures} evaluations failed; see the notes column")));
    }
    Ok(())
}
