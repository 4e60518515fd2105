use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use besselhr::{asympt, coeffs, kernel, C64};
use clap::ValueEnum;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::Failure;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Run metadata written at the top of every artifact. Contains nothing that
/// depends on the machine or the thread count, so identical configurations
/// give identical bytes.
#[derive(Serialize)]
pub struct Header {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: Value,
    pub config_hash: String,
    pub policy: Value,
}

impl Header {
    pub fn new<T: Serialize>(command: &str, config: &T) -> Self {
        let config = serde_json::to_value(config).expect("config serializes");
        let mut h = Sha256::new();
        h.update(command.as_bytes());
        h.update(b"\n");
        h.update(config.to_string().as_bytes());
        let config_hash = h.finalize().iter().map(|b| format!("{b:02x}")).collect();
        Header {
            tool: "besselhr",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            config,
            config_hash,
            policy: policy(),
        }
    }
}

fn policy() -> Value {
    json!({
        "asymptotic": {
            "sector_margin": asympt::DEFAULT_THETA,
            "max_terms": asympt::DEFAULT_M_CAP,
            "floor_constant": asympt::FLOOR_CONSTANT,
            "truncation": "smallest term",
        },
        "coefficients": { "max_terms": coeffs::B_MAX_TERMS },
        "series": "multiprecision connection sum, double-precision fast path when the error bound allows",
        "contour": "K-type: vertical line through the saddle; H-type: bent contour with rays",
        "kernel_cancellation_switch": kernel::CANCELLATION_SWITCH,
    })
}

pub fn complex(z: C64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

/// One evaluated grid point.
pub struct Row {
    pub x: f64,
    pub outcome: Result<Point, String>,
}

pub struct Point {
    pub value: C64,
    pub err: f64,
    pub method: &'static str,
    pub cancellation: Option<f64>,
}

impl Row {
    pub fn failed(&self) -> bool {
        self.outcome.is_err()
    }
}

pub fn open(out: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Failure::Usage(format!("cannot create {}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn io_err(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(format!("write failed: {e}"))
}

pub fn write_json(out: Option<&Path>, header: &Header, body: Value) -> Result<(), Failure> {
    let mut doc = json!({ "header": header });
    if let (Value::Object(d), Value::Object(b)) = (&mut doc, body) {
        d.extend(b);
    }
    let mut w = open(out)?;
    serde_json::to_writer_pretty(&mut w, &doc).map_err(io_err)?;
    writeln!(w).map_err(io_err)?;
    w.flush().map_err(io_err)
}

/// CSV with the header as a leading `# {...}` comment line.
pub fn write_csv(out: Option<&Path>, header: &Header, columns: &[&str], rows: &[Vec<String>]) -> Result<(), Failure> {
    let mut w = open(out)?;
    writeln!(w, "# {}", serde_json::to_string(header).map_err(io_err)?).map_err(io_err)?;
    {
        let mut c = csv::Writer::from_writer(&mut w);
        c.write_record(columns).map_err(io_err)?;
        for r in rows {
            c.write_record(r).map_err(io_err)?;
        }
        c.flush().map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

pub fn num(x: f64) -> String {
    format!("{x:e}")
}

pub fn write_table(out: Option<&Path>, format: Format, header: &Header, rows: &[Row]) -> Result<(), Failure> {
    match format {
        Format::Csv => {
            let body: Vec<Vec<String>> = rows
                .iter()
                .map(|r| match &r.outcome {
                    Ok(p) => vec![
                        num(r.x),
                        num(p.value.re),
                        num(p.value.im),
                        num(p.err),
                        p.method.to_string(),
                        p.cancellation.map(num).unwrap_or_default(),
                    ],
                    Err(msg) => vec![num(r.x), "NaN".into(), "NaN".into(), format!("error: {msg}"), "failed".into(), String::new()],
                })
                .collect();
            write_csv(out, header, &["x", "Re", "Im", "err", "method", "cancellation"], &body)
        }
        Format::Json => {
            let body: Vec<Value> = rows
                .iter()
                .map(|r| match &r.outcome {
                    Ok(p) => json!({
                        "x": r.x,
                        "value": complex(p.value),
                        "err": p.err,
                        "method": p.method,
                        "cancellation": p.cancellation,
                    }),
                    Err(msg) => json!({ "x": r.x, "value": null, "err": null, "method": "failed", "error": msg }),
                })
                .collect();
            write_json(out, header, json!({ "rows": body }))
        }
    }
}
