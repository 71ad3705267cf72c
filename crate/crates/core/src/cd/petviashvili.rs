use num_complex::Complex64;

use super::pow_p;
use crate::error::{Error, Result};
use crate::torus::{PeriodizedKernel, Spectral, TorusGrid};

/// Modes with `K̂ ≤ RESOLVED·K̂(0)` are dropped from the iteration.
const RESOLVED: f64 = 1e-14;

fn resolved_modes(kernel: &PeriodizedKernel) -> Result<Vec<bool>> {
    let m0 = kernel.multiplier[0];
    if !(m0 > 0.0) {
        return Err(Error::SpectrumNonPositive { mode: 0, value: m0 });
    }
    let thr = RESOLVED * m0;
    kernel
        .multiplier
        .iter()
        .enumerate()
        .map(|(mode, &value)| {
            if value < -thr {
                Err(Error::SpectrumNonPositive { mode, value })
            } else {
                Ok(value > thr)
            }
        })
        .collect()
}

fn step_with(u: &[f64], kernel: &PeriodizedKernel, p: f64, gamma: f64, resolved: &[bool]) -> Result<(Vec<f64>, f64)> {
    let sp = &kernel.spectral;
    let uh = sp.forward(u);
    let wh = sp.forward(&pow_p(u, p));
    let mut num = 0.0;
    let mut den = 0.0;
    for k in 0..uh.len() {
        if resolved[k] {
            num += uh[k].norm_sqr() / kernel.multiplier[k];
            den += (uh[k] * wh[k].conj()).re;
        }
    }
    if !(den > 0.0) || !den.is_finite() || !num.is_finite() {
        return Err(Error::DegenerateDenominator);
    }
    let m = num / den;
    let scale = m.powf(gamma);
    let out: Vec<Complex64> = (0..uh.len())
        .map(|k| if resolved[k] { wh[k] * (scale * kernel.multiplier[k]) } else { Complex64::new(0.0, 0.0) })
        .collect();
    Ok((sp.inverse(out), m))
}

/// One step `û⁺ = Mᵞ K̂ (uᵖ)̂`; returns the new iterate and `M`.
pub fn petviashvili_step(u: &[f64], kernel: &PeriodizedKernel, p: f64, gamma: f64) -> Result<(Vec<f64>, f64)> {
    let resolved = resolved_modes(kernel)?;
    step_with(u, kernel, p, gamma, &resolved)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PetviashviliOptions {
    pub gamma: f64,
    /// Stop when `‖uⁿ⁺¹ − uⁿ‖∞ ≤ tol·‖uⁿ⁺¹‖∞`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PetviashviliOptions {
    fn default() -> Self {
        Self { gamma: 2.0, tol: 1e-13, max_iter: 5000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PetviashviliRun {
    pub u: Vec<f64>,
    pub m: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Relative sup change per iteration.
    pub changes: Vec<f64>,
    pub m_history: Vec<f64>,
}

/// Iterate from `u0`. Returns `Diverged` once the iterate blows up, collapses or the
/// fixed-point residual grows a millionfold.
pub fn petviashvili(u0: &[f64], kernel: &PeriodizedKernel, p: f64, opts: &PetviashviliOptions) -> Result<PetviashviliRun> {
    let resolved = resolved_modes(kernel)?;
    let sup = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let fp_res = |v: &[f64]| super::fixed_point_residual(v, kernel, p);
    let r0 = fp_res(u0).max(f64::MIN_POSITIVE);
    let mut u = u0.to_vec();
    let mut run = PetviashviliRun { u: Vec::new(), m: f64::NAN, iterations: 0, converged: false, changes: Vec::new(), m_history: Vec::new() };
    for it in 1..=opts.max_iter {
        let (next, m) = step_with(&u, kernel, p, opts.gamma, &resolved)?;
        let amp = sup(&next);
        if !amp.is_finite() || next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Diverged(format!("non-finite iterate at step {it}")));
        }
        if amp > 1e8 || amp < 1e-8 {
            return Err(Error::Diverged(format!("amplitude {amp:e} at step {it}")));
        }
        let r = fp_res(&next);
        if r > 1e6 * r0 {
            return Err(Error::Diverged(format!("residual grew from {r0:e} to {r:e} by step {it}")));
        }
        let change = next.iter().zip(&u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / amp;
        run.changes.push(change);
        run.m_history.push(m);
        run.m = m;
        run.iterations = it;
        u = next;
        if change <= opts.tol {
            run.converged = true;
            break;
        }
    }
    run.u = u;
    Ok(run)
}

/// Shift `u` circularly to best match `reference` (peak of the cross-correlation).
/// Returns the shifted copy and the shift in nodes.
pub fn align(grid: &TorusGrid, u: &[f64], reference: &[f64]) -> (Vec<f64>, usize) {
    let sp = Spectral::new(*grid);
    let a = sp.forward(u);
    let b = sp.forward(reference);
    let corr = sp.inverse(a.iter().zip(&b).map(|(x, y)| x * y.conj()).collect());
    let n = grid.n;
    let s = (0..n).fold(0, |best, j| if corr[j] > corr[best] { j } else { best });
    ((0..n).map(|j| u[(j + s) % n]).collect(), s)
}
