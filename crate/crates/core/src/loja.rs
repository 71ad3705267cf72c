//! Empirical Łojasiewicz analysis: exponent fits, decay classification,
//! tail-sum bounds and angle/rate profiles.

use crate::dc::IterateTrace;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HLimit {
    /// Final energy of the sequence.
    Last,
    /// Aitken Δ² extrapolation from the last three energies.
    Aitken,
    Known(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub tail_fraction: f64,
    pub h_limit: HLimit,
    pub classification_tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { tail_fraction: 0.5, h_limit: HLimit::Last, classification_tol: 0.05 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayModel {
    Exponential,
    Algebraic,
}

impl DecayModel {
    pub fn as_str(self) -> &'static str {
        match self {
            DecayModel::Exponential => "exponential",
            DecayModel::Algebraic => "algebraic",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    /// Fitted exponent clamped to `(0, 0.5]`.
    pub theta: f64,
    /// Unclamped regression value `1 − slope`.
    pub theta_raw: f64,
    /// Regression constant `exp(intercept)`.
    pub c: f64,
    /// Largest `c` with `‖∇H‖ ≥ c|H − h|^{1−θ}` on every analyzed sample.
    pub c_lower: f64,
    pub model: DecayModel,
    pub fit_r2: f64,
    pub h_limit: f64,
    pub tail_fraction: f64,
    pub samples: usize,
}

const THETA_MIN: f64 = 1e-6;

/// Least squares `y = a + b x`; returns `(a, b, r², sse)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64, f64, f64)> {
    let n = x.len() as f64;
    if x.len() < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let sse: f64 = x.iter().zip(y).map(|(xi, yi)| (yi - a - b * xi).powi(2)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let r2 = if syy > 0.0 { (1.0 - sse / syy).clamp(0.0, 1.0) } else { 1.0 };
    Some((a, b, r2, sse))
}

/// Aitken Δ² limit of the last three entries; falls back to the last value
/// when the second difference vanishes.
pub fn aitken_limit(seq: &[f64]) -> f64 {
    let n = seq.len();
    if n < 3 {
        return seq.last().copied().unwrap_or(0.0);
    }
    let (a, b, c) = (seq[n - 3], seq[n - 2], seq[n - 1]);
    let den = c - 2.0 * b + a;
    if den.abs() <= f64::EPSILON * c.abs().max(1e-300) {
        return c;
    }
    let lim = c - (c - b) * (c - b) / den;
    if lim.is_finite() {
        lim
    } else {
        c
    }
}

fn resolve_limit(energies: &[f64], h: HLimit) -> f64 {
    match h {
        HLimit::Last => *energies.last().unwrap(),
        HLimit::Aitken => aitken_limit(energies),
        HLimit::Known(v) => v,
    }
}

/// Fit `log‖∇H‖ = (1 − θ) log|H − h| + log c` over the tail of the samples.
pub fn estimate_exponent(energies: &[f64], grad_norms: &[f64], opts: &FitOptions) -> Result<RateFit> {
    if energies.len() != grad_norms.len() {
        return Err(Error::InvalidArgument("energies and grad_norms differ in length".into()));
    }
    if energies.len() < 10 {
        return Err(Error::InsufficientData(format!("{} samples, need at least 10", energies.len())));
    }
    if !(opts.tail_fraction > 0.0 && opts.tail_fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!("tail_fraction {} not in (0, 1]", opts.tail_fraction)));
    }
    let n = energies.len();
    let start = ((n as f64) * (1.0 - opts.tail_fraction)).floor() as usize;
    let start = start.min(n - 2);
    let tail = &energies[start..];

    let scale = energies[0].abs().max(energies.iter().fold(0.0_f64, |m, e| m.max(e.abs()))).max(1e-300);
    let slack = 1e-12 * scale;
    let decreasing = tail.windows(2).all(|w| w[1] <= w[0] + slack);
    let increasing = tail.windows(2).all(|w| w[1] >= w[0] - slack);
    if !decreasing && !increasing {
        let idx = tail
            .windows(3)
            .position(|w| (w[1] - w[0]) * (w[2] - w[1]) < 0.0 && (w[2] - w[1]).abs() > slack)
            .unwrap_or(0);
        return Err(Error::NonMonotoneTail { index: start + idx + 1 });
    }

    let h = resolve_limit(energies, opts.h_limit);
    let floor = 100.0 * f64::EPSILON * energies[0].abs().max(f64::MIN_POSITIVE);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for k in start..n {
        let gap = (energies[k] - h).abs();
        let g = grad_norms[k];
        if gap > floor && g > 0.0 && gap.is_finite() && g.is_finite() {
            xs.push(gap.ln());
            ys.push(g.ln());
        }
    }
    if xs.len() < 3 {
        return Err(Error::InsufficientData(format!("{} usable tail samples", xs.len())));
    }
    let (a, b, r2, _) =
        linear_fit(&xs, &ys).ok_or_else(|| Error::InsufficientData("energy gaps have zero spread".into()))?;
    let theta_raw = 1.0 - b;
    let theta = theta_raw.clamp(THETA_MIN, 0.5);
    let c_lower = xs
        .iter()
        .zip(&ys)
        .map(|(lx, ly)| (ly - (1.0 - theta) * lx).exp())
        .fold(f64::INFINITY, f64::min);
    let model = if (theta - 0.5).abs() < opts.classification_tol {
        DecayModel::Exponential
    } else {
        DecayModel::Algebraic
    };
    Ok(RateFit {
        theta,
        theta_raw,
        c: a.exp(),
        c_lower,
        model,
        fit_r2: r2,
        h_limit: h,
        tail_fraction: opts.tail_fraction,
        samples: xs.len(),
    })
}

/// Largest `c` with `‖∇Hₖ‖ ≥ c|Hₖ − h|^{1−θ}` over every sample with a nonzero gap.
pub fn envelope_constant(energies: &[f64], grad_norms: &[f64], h_limit: f64, theta: f64) -> f64 {
    energies
        .iter()
        .zip(grad_norms)
        .filter_map(|(e, g)| {
            let gap = (e - h_limit).abs();
            (gap > 0.0).then(|| g / gap.powf(1.0 - theta))
        })
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    pub model: DecayModel,
    /// δ in `e^{−δt}` or p in `t^{−p}`, for the winning model.
    pub rate: f64,
    pub exp_rate: f64,
    pub alg_rate: f64,
    pub r2_exp: f64,
    pub r2_alg: f64,
    /// r² of the winning model.
    pub r2: f64,
    pub samples: usize,
}

impl DecayFit {
    /// `|p − θ/(1−2θ)| ≤ tol` for an algebraic fit; `None` when exponential.
    pub fn matches_theta(&self, theta: f64, tol: f64) -> Option<bool> {
        match self.model {
            DecayModel::Algebraic => Some((self.rate - algebraic_exponent(theta)).abs() <= tol),
            DecayModel::Exponential => None,
        }
    }
}

/// `θ/(1 − 2θ)`, the algebraic decay exponent for `θ < ½`.
pub fn algebraic_exponent(theta: f64) -> f64 {
    theta / (1.0 - 2.0 * theta)
}

/// `‖uₖ − ũ‖` for each state.
pub fn distances_to(states: &[Vec<f64>], limit: &[f64]) -> Vec<f64> {
    states.iter().map(|u| crate::linalg::dist(u, limit)).collect()
}

/// Fit `log d` against `t` (exponential) and against `log t` (algebraic) on the
/// tail; the smaller residual wins. Samples with `t ≤ 0` or
/// `d ≤ min_rel·max(d)` are skipped.
pub fn classify_decay(times: &[f64], dists: &[f64], tail_fraction: f64, min_rel: f64) -> Result<DecayFit> {
    if times.len() != dists.len() {
        return Err(Error::InvalidArgument("times and distances differ in length".into()));
    }
    let n = times.len();
    if n < 10 {
        return Err(Error::InsufficientData(format!("{n} samples, need at least 10")));
    }
    let start = ((n as f64) * (1.0 - tail_fraction.clamp(0.0, 1.0))).floor() as usize;
    let dmax = dists.iter().fold(0.0_f64, |m, d| m.max(*d));
    let cut = (min_rel * dmax).max(f64::MIN_POSITIVE);
    let (mut t, mut lt, mut ld) = (Vec::new(), Vec::new(), Vec::new());
    for k in start..n {
        if times[k] > 0.0 && dists[k] > cut && dists[k].is_finite() {
            t.push(times[k]);
            lt.push(times[k].ln());
            ld.push(dists[k].ln());
        }
    }
    if t.len() < 5 {
        return Err(Error::InsufficientData(format!("{} usable tail samples", t.len())));
    }
    let (_, be, r2e, ssee) = linear_fit(&t, &ld).ok_or_else(|| Error::InsufficientData("no time spread".into()))?;
    let (_, ba, r2a, ssea) = linear_fit(&lt, &ld).ok_or_else(|| Error::InsufficientData("no time spread".into()))?;
    let (model, rate, r2) = if ssee <= ssea {
        (DecayModel::Exponential, -be, r2e)
    } else {
        (DecayModel::Algebraic, -ba, r2a)
    };
    Ok(DecayFit { model, rate, exp_rate: -be, alg_rate: -ba, r2_exp: r2e, r2_alg: r2a, r2, samples: t.len() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailReport {
    /// `rhs − lhs` at each n; negative entries are violations.
    pub margins: Vec<f64>,
    pub min_slack: f64,
    pub theta_valid: bool,
    pub holds: bool,
}

/// Check `Σ_{k≥n}‖uᵏ⁺¹ − uᵏ‖ ≤ |Hₙ − h|^θ / (cσθ)` at every n.
/// θ outside `(0, ½]` is flagged invalid and the check fails.
pub fn l1_tail_bound_check(
    step_norms: &[f64],
    energies: &[f64],
    h_limit: f64,
    c: f64,
    sigma: f64,
    theta: f64,
) -> TailReport {
    let theta_valid = theta > 0.0 && theta <= 0.5 && c > 0.0 && sigma > 0.0;
    let m = step_norms.len();
    let mut tail = 0.0;
    let mut margins = vec![0.0; m + 1];
    for n in (0..=m).rev() {
        if n < m {
            tail += step_norms[n];
        }
        let gap = (energies[n] - h_limit).max(0.0);
        let rhs = gap.powf(theta) / (c * sigma * theta);
        margins[n] = rhs - tail;
    }
    let min_slack = margins.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = 1e-12 * margins.iter().fold(1e-300_f64, |a, b| a.max(b.abs()));
    let holds = theta_valid && min_slack >= -tol;
    TailReport { margins, min_slack, theta_valid, holds }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleRate {
    /// `(Hₙ − Hₙ₊₁)/(‖∇Hₙ‖‖Δuₙ‖)`; `None` when the denominator vanishes.
    pub sigma: Option<f64>,
    /// `‖Δuₙ‖/‖∇Hₙ‖`; `None` when the gradient vanishes.
    pub gamma: Option<f64>,
}

pub fn angle_rate_profile(trace: &IterateTrace) -> Vec<AngleRate> {
    (0..trace.step_norms.len())
        .map(|k| {
            let g = trace.grad_norms[k];
            let s = trace.step_norms[k];
            let den = g * s;
            AngleRate {
                sigma: (den > 0.0).then(|| (trace.energies[k] - trace.energies[k + 1]) / den),
                gamma: (g > 0.0).then(|| s / g),
            }
        })
        .collect()
}
