//! On-disk store of computed approximants, one JSON file per
//! `(β, k, m, precision)` with every number written as a decimal string.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::bigreal::{parse_decimal, to_decimal, BigReal};
use super::{bura_partial_fractions, reciprocal_partial_fractions, ApproxError, PoleResidueForm, RationalMinimax};

pub const CACHE_FORMAT: &str = "fracpow-bura/1";
pub const CACHE_DIR_ENV: &str = "FRACPOW_CACHE_DIR";

#[derive(Serialize, Deserialize)]
struct FormRecord {
    constant: Option<String>,
    poles: Vec<String>,
    coefficients: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct CacheRecord {
    format: String,
    beta: String,
    k: usize,
    m: usize,
    precision: u32,
    error: String,
    numerator: Vec<String>,
    denominator: Vec<String>,
    extreme_points: Vec<String>,
    signs: Vec<i8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bura_form: Option<FormRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reciprocal_form: Option<FormRecord>,
}

fn strings(v: &[BigReal]) -> Vec<String> {
    v.iter().map(to_decimal).collect()
}

fn form_record(f: &PoleResidueForm) -> FormRecord {
    FormRecord {
        constant: f.constant().map(to_decimal),
        poles: strings(f.poles()),
        coefficients: strings(f.coefficients()),
    }
}

/// `$FRACPOW_CACHE_DIR`, or `fracpow-cache` in the working directory.
pub fn default_cache_dir() -> PathBuf {
    std::env::var_os(CACHE_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("fracpow-cache"))
}

pub fn cache_path(dir: &Path, beta: f64, k: usize, m: usize, precision: u32) -> PathBuf {
    dir.join(format!("bura_{beta}_{k}_{m}_{precision}.json"))
}

/// Writes `r` atomically (temporary file, then rename) and returns its path.
pub fn cache_store(dir: &Path, r: &RationalMinimax) -> Result<PathBuf, ApproxError> {
    fs::create_dir_all(dir)?;
    let (k, m) = r.degrees();
    let record = CacheRecord {
        format: CACHE_FORMAT.to_string(),
        beta: format!("{}", r.beta()),
        k,
        m,
        precision: r.precision(),
        error: to_decimal(r.error()),
        numerator: strings(r.numerator().coeffs()),
        denominator: strings(r.denominator().coeffs()),
        extreme_points: strings(r.extreme_points()),
        signs: r.signs().to_vec(),
        bura_form: bura_partial_fractions(r).ok().as_ref().map(form_record),
        reciprocal_form: reciprocal_partial_fractions(r).ok().as_ref().map(form_record),
    };
    let path = cache_path(dir, r.beta(), k, m, r.precision());
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    serde_json::to_writer_pretty(&mut tmp, &record).map_err(std::io::Error::from)?;
    tmp.write_all(b"\n")?;
    tmp.as_file().sync_all()?;
    tmp.persist(&path).map_err(|e| e.error)?;
    Ok(path)
}

/// Loads and re-certifies a cached approximant.
pub fn cache_load(dir: &Path, beta: f64, k: usize, m: usize, precision: u32) -> Result<RationalMinimax, ApproxError> {
    let path = cache_path(dir, beta, k, m, precision);
    let text = match fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(ApproxError::CacheMiss(path)),
        Err(e) => return Err(e.into()),
    };
    let corrupt = |reason: String| ApproxError::CorruptCache {
        path: path.clone(),
        reason,
    };
    let rec: CacheRecord = serde_json::from_str(&text).map_err(|e| corrupt(e.to_string()))?;
    if rec.format != CACHE_FORMAT {
        return Err(corrupt(format!("format tag {:?}", rec.format)));
    }
    if rec.beta.parse::<f64>().ok() != Some(beta) || rec.k != k || rec.m != m || rec.precision != precision {
        return Err(corrupt("key fields do not match the file name".into()));
    }
    let parse = |v: &[String]| -> Result<Vec<BigReal>, ApproxError> {
        v.iter()
            .map(|s| parse_decimal(precision, s).ok_or_else(|| corrupt(format!("bad number {s:?}"))))
            .collect()
    };
    let error = parse(std::slice::from_ref(&rec.error))?.remove(0);
    let r = RationalMinimax::from_stored(
        beta,
        (k, m),
        parse(&rec.numerator)?,
        parse(&rec.denominator)?,
        error,
        parse(&rec.extreme_points)?,
        rec.signs,
    )
    .map_err(|e| corrupt(e.to_string()))?;
    Ok(r)
}
