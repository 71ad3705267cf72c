//! Trace CSV reader and the rate report behind `diagnose`.
//!
//! Schema: a header row naming at least `energy` and `grad_norm`. An optional
//! time column `t` (or iteration column `k`) and state columns `u0, u1, …`
//! enable the decay classification of `‖uₖ − u_last‖`. Other columns are ignored.

use std::io::Read;
use std::path::Path;

use gradflow::loja::{classify_decay, distances_to, estimate_exponent, FitOptions, HLimit};
use serde::Serialize;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub times: Option<Vec<f64>>,
    pub energies: Vec<f64>,
    pub grad_norms: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

fn state_index(name: &str) -> Option<usize> {
    let digits = name.strip_prefix('u')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || (digits.len() > 1 && digits.starts_with('0')) {
        return None;
    }
    digits.parse().ok()
}

pub fn parse_trace<R: Read>(reader: R) -> Result<Trace> {
    let schema = |m: String| HarnessError::Schema(m);
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = rdr.headers().map_err(|e| schema(format!("header: {e}")))?.clone();
    let names: Vec<&str> = header.iter().map(str::trim).collect();
    for (i, n) in names.iter().enumerate() {
        if names[..i].contains(n) {
            return Err(schema(format!("duplicate column `{n}`")));
        }
    }
    let col = |n: &str| names.iter().position(|c| *c == n);
    let e_col = col("energy").ok_or_else(|| schema("missing column `energy`".into()))?;
    let g_col = col("grad_norm").ok_or_else(|| schema("missing column `grad_norm`".into()))?;
    let t_col = col("t").or_else(|| col("k"));
    let mut u_cols: Vec<(usize, usize)> = names.iter().enumerate().filter_map(|(i, n)| state_index(n).map(|k| (k, i))).collect();
    u_cols.sort_unstable();
    if u_cols.iter().enumerate().any(|(j, (k, _))| j != *k) {
        return Err(schema("state columns must be u0, u1, … without gaps".into()));
    }

    let mut tr = Trace { times: t_col.map(|_| Vec::new()), energies: Vec::new(), grad_norms: Vec::new(), states: Vec::new() };
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| schema(format!("row {}: {e}", row + 2)))?;
        let num = |i: usize| -> Result<f64> {
            let s = rec.get(i).unwrap_or("").trim();
            match s.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(schema(format!("row {}, column `{}`: `{s}` is not a finite number", row + 2, names[i]))),
            }
        };
        tr.energies.push(num(e_col)?);
        tr.grad_norms.push(num(g_col)?);
        if let (Some(t), Some(v)) = (t_col, tr.times.as_mut()) {
            v.push(num(t)?);
        }
        if !u_cols.is_empty() {
            tr.states.push(u_cols.iter().map(|(_, i)| num(*i)).collect::<Result<_>>()?);
        }
    }
    if tr.energies.is_empty() {
        return Err(schema("no data rows".into()));
    }
    if let Some(t) = &tr.times {
        if t.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(schema("time column is not strictly increasing".into()));
        }
    }
    Ok(tr)
}

pub fn read_trace(path: &Path) -> Result<Trace> {
    let f = std::fs::File::open(path).map_err(|e| HarnessError::io(path, e))?;
    parse_trace(std::io::BufReader::new(f))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport {
    pub model: &'static str,
    pub rate: f64,
    pub r2: f64,
    pub r2_exp: f64,
    pub r2_alg: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    pub theta: f64,
    pub theta_raw: f64,
    pub c: f64,
    pub c_lower: f64,
    pub model: &'static str,
    pub r2: f64,
    pub h_limit: f64,
    pub tail_fraction: f64,
    pub samples: usize,
    pub decay: Option<DecayReport>,
    pub decay_error: Option<String>,
}

pub fn diagnose_trace(tr: &Trace, opts: &FitOptions) -> Result<RateReport> {
    let fit = estimate_exponent(&tr.energies, &tr.grad_norms, opts)?;
    let (decay, decay_error) = match (&tr.times, tr.states.len()) {
        (Some(t), n) if n >= 2 => {
            let d = distances_to(&tr.states, &tr.states[n - 1]);
            match classify_decay(&t[..n - 1], &d[..n - 1], opts.tail_fraction, 1e-12) {
                Ok(f) => (
                    Some(DecayReport {
                        model: f.model.as_str(),
                        rate: f.rate,
                        r2: f.r2,
                        r2_exp: f.r2_exp,
                        r2_alg: f.r2_alg,
                        samples: f.samples,
                    }),
                    None,
                ),
                Err(e) => (None, Some(e.to_string())),
            }
        }
        _ => (None, None),
    };
    Ok(RateReport {
        theta: fit.theta,
        theta_raw: fit.theta_raw,
        c: fit.c,
        c_lower: fit.c_lower,
        model: fit.model.as_str(),
        r2: fit.fit_r2,
        h_limit: fit.h_limit,
        tail_fraction: fit.tail_fraction,
        samples: fit.samples,
        decay,
        decay_error,
    })
}

/// Rate report with the default fit options (last energy as the limit).
pub fn diagnose(path: &Path) -> Result<RateReport> {
    diagnose_trace(&read_trace(path)?, &FitOptions::default())
}

pub fn fit_options(h_limit: Option<f64>, h_estimate: &str, tail_fraction: f64) -> FitOptions {
    let h_limit = match (h_limit, h_estimate) {
        (Some(h), _) => HLimit::Known(h),
        (None, "aitken") => HLimit::Aitken,
        _ => HLimit::Last,
    };
    FitOptions { tail_fraction, h_limit, ..FitOptions::default() }
}
