use besselhr::{SignVector, SpectralIndex, C64};
use clap::Args;
use serde::Serialize;

use crate::Failure;

/// Rank and spectral index. Either flag may be left out when the other (or
/// the sign vector) fixes the rank.
#[derive(Args, Clone, Debug, Serialize)]
pub struct IndexArgs {
    /// Rank n.
    #[arg(long)]
    pub n: Option<usize>,
    /// Comma-separated complex components, e.g. `0.25,-0.25` or `0.1+0.2i,-0.1-0.2i`.
    /// Shifted to sum zero. Defaults to all zeros.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<String>,
}

impl IndexArgs {
    /// Resolves the rank against an optional rank implied elsewhere
    /// (sign vector, δ). Falls back to `default_n` when nothing pins it down.
    pub fn resolve(&self, implied: Option<usize>, default_n: Option<usize>) -> Result<SpectralIndex, Failure> {
        let lam = self.lambda.as_deref().map(parse_complex_list).transpose()?;
        let mut n = self.n;
        for (what, k) in [("--lambda", lam.as_ref().map(Vec::len)), ("sign/parity vector", implied)] {
            match (n, k) {
                (Some(a), Some(b)) if a != b => {
                    return Err(Failure::Usage(format!("{what} has {b} components but the rank is {a}")))
                }
                (None, Some(b)) => n = Some(b),
                _ => {}
            }
        }
        let n = n.or(default_n).ok_or_else(|| Failure::Usage("give --n or --lambda".into()))?;
        if n == 0 {
            return Err(Failure::Usage("the rank must be at least 1".into()));
        }
        let lam = lam.unwrap_or_else(|| vec![C64::new(0.0, 0.0); n]);
        SpectralIndex::new(lam).map_err(|e| Failure::Usage(e.to_string()))
    }
}

pub fn parse_complex(s: &str) -> Result<C64, Failure> {
    let t = s.trim();
    t.parse::<C64>().map_err(|_| Failure::Usage(format!("bad complex number {t:?}; expected a+bi")))
}

pub fn parse_complex_list(s: &str) -> Result<Vec<C64>, Failure> {
    s.split(',').map(parse_complex).collect()
}

pub fn parse_signs(s: &str) -> Result<SignVector, Failure> {
    SignVector::parse(s.trim()).map_err(|e| Failure::Usage(e.to_string()))
}

pub fn parse_delta(s: &str) -> Result<Vec<u8>, Failure> {
    s.split(',')
        .map(|d| match d.trim() {
            "0" => Ok(0),
            "1" => Ok(1),
            other => Err(Failure::Usage(format!("parity entries must be 0 or 1, got {other:?}"))),
        })
        .collect()
}

/// `log:a:b:k`, `lin:a:b:k` or a comma-separated list of numbers.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::Usage(format!("bad grid {s:?}; expected log:a:b:k, lin:a:b:k or a list"));
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
    let parts: Vec<&str> = s.split(':').collect();
    let pts = match parts.as_slice() {
        [kind @ ("log" | "lin"), a, b, k] => {
            let (a, b) = (num(a)?, num(b)?);
            let k: usize = k.trim().parse().map_err(|_| bad())?;
            if k == 0 || (*kind == "log" && (a <= 0.0 || b <= 0.0)) {
                return Err(bad());
            }
            (0..k)
                .map(|i| {
                    let t = if k == 1 { 0.0 } else { i as f64 / (k - 1) as f64 };
                    // keep the endpoints exact
                    if i == 0 {
                        a
                    } else if i == k - 1 {
                        b
                    } else if *kind == "log" {
                        (a.ln() + t * (b.ln() - a.ln())).exp()
                    } else {
                        a + t * (b - a)
                    }
                })
                .collect()
        }
        [list] => list.split(',').map(num).collect::<Result<Vec<_>, _>>()?,
        _ => return Err(bad()),
    };
    if pts.iter().any(|x: &f64| !x.is_finite()) {
        return Err(bad());
    }
    Ok(pts)
}
