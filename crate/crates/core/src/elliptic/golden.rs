//! Reader for golden-vector files.
//!
//! One JSON object per line, all numeric fields as decimal strings:
//!
//! ```text
//! {"fn":"wp","m":"0.5","z_re":"1.0","z_im":"0.0","val_re":"...","val_im":"..."}
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. Decimal strings are
//! converted with the correctly rounded `str::parse::<f64>`.

use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use num_complex::Complex64;
use serde::Deserialize;
use thiserror::Error;

use super::{jacobi_sn, EllipticError, Weierstrass};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GoldenFn {
    Wp,
    Wpp,
    Zeta,
    Sigma,
    Sn,
}

impl FromStr for GoldenFn {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "wp" => Ok(Self::Wp),
            "wpp" => Ok(Self::Wpp),
            "zeta" => Ok(Self::Zeta),
            "sigma" => Ok(Self::Sigma),
            "sn" => Ok(Self::Sn),
            other => Err(format!("unknown function tag {other:?}")),
        }
    }
}

impl fmt::Display for GoldenFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self {
            Self::Wp => "wp",
            Self::Wpp => "wpp",
            Self::Zeta => "zeta",
            Self::Sigma => "sigma",
            Self::Sn => "sn",
        };
        f.write_str(tag)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoldenRecord {
    pub func: GoldenFn,
    pub m: f64,
    pub z: Complex64,
    pub value: Complex64,
}

#[derive(Debug, Error)]
pub enum GoldenError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Deserialize)]
struct RawRecord {
    #[serde(rename = "fn")]
    func: String,
    m: String,
    z_re: String,
    z_im: String,
    val_re: String,
    val_im: String,
}

fn decimal(field: &str, text: &str, line: usize) -> Result<f64, GoldenError> {
    text.trim().parse::<f64>().map_err(|e| GoldenError::Parse {
        line,
        message: format!("field {field}: {e} ({text:?})"),
    })
}

pub fn parse_line(text: &str, line: usize) -> Result<Option<GoldenRecord>, GoldenError> {
    let trimmed = text.trim();
    if trimmed.is_empty() || trimmed.starts_with('#') {
        return Ok(None);
    }
    let raw: RawRecord = serde_json::from_str(trimmed).map_err(|e| GoldenError::Parse {
        line,
        message: e.to_string(),
    })?;
    let func = raw
        .func
        .parse::<GoldenFn>()
        .map_err(|message| GoldenError::Parse { line, message })?;
    Ok(Some(GoldenRecord {
        func,
        m: decimal("m", &raw.m, line)?,
        z: Complex64::new(decimal("z_re", &raw.z_re, line)?, decimal("z_im", &raw.z_im, line)?),
        value: Complex64::new(
            decimal("val_re", &raw.val_re, line)?,
            decimal("val_im", &raw.val_im, line)?,
        ),
    }))
}

pub fn read_golden<R: BufRead>(reader: R) -> Result<Vec<GoldenRecord>, GoldenError> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        if let Some(rec) = parse_line(&line?, idx + 1)? {
            out.push(rec);
        }
    }
    Ok(out)
}

/// Evaluates the kernel function named by a record at the record's point.
pub fn evaluate_record(rec: &GoldenRecord) -> Result<Complex64, EllipticError> {
    if rec.func == GoldenFn::Sn {
        return Ok(Complex64::new(jacobi_sn(rec.z.re, rec.m), 0.0));
    }
    let w = Weierstrass::from_modulus(rec.m)?;
    match rec.func {
        GoldenFn::Wp => w.wp(rec.z),
        GoldenFn::Wpp => w.wp_prime(rec.z),
        GoldenFn::Zeta => w.zeta(rec.z),
        GoldenFn::Sigma => Ok(w.sigma(rec.z)),
        GoldenFn::Sn => unreachable!(),
    }
}

/// Relative deviation `|computed - expected| / max(|expected|, 1e-300)`.
pub fn relative_error(rec: &GoldenRecord) -> Result<f64, EllipticError> {
    let got = evaluate_record(rec)?;
    Ok((got - rec.value).norm() / rec.value.norm().max(1e-300))
}
