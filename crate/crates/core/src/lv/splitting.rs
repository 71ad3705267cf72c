use nalgebra::{DMatrix, SymmetricEigen};

use super::{check_positive, max_asymmetry, LVSystem};
use crate::error::{Error, Result};

const POWER_MAX_ITERS: usize = 200_000;

fn matvec(b: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    b.iter().map(|r| r.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
}

fn power_sq(b: &[Vec<f64>], start: Vec<f64>) -> f64 {
    let nrm = start.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut v: Vec<f64> = start.iter().map(|x| x / nrm).collect();
    let mut rho = 0.0;
    for _ in 0..POWER_MAX_ITERS {
        let w = matvec(b, &matvec(b, &v));
        rho = v.iter().zip(&w).map(|(a, c)| a * c).sum::<f64>();
        let wn = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if wn == 0.0 {
            return 0.0;
        }
        let res = w.iter().zip(&v).map(|(a, c)| (a - rho * c).powi(2)).sum::<f64>().sqrt();
        v = w.iter().map(|x| x / wn).collect();
        if res <= 1e-12 * rho.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    rho.max(0.0)
}

/// Spectral radius of a symmetric matrix by power iteration on `B²`.
///
/// Starts from `𝟙/√n` and from an alternating-sign vector, keeping the larger
/// estimate; the second start covers matrices whose dominant eigenvector is
/// orthogonal to `𝟙`.
pub fn spectral_radius(b: &[Vec<f64>]) -> Result<f64> {
    let asym = max_asymmetry(b);
    if asym >= 1e-12 {
        return Err(Error::NotSymmetric(asym));
    }
    let n = b.len();
    let ones = vec![1.0; n];
    let alt: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 + i as f64 / n as f64 } else { -1.0 - i as f64 / n as f64 }).collect();
    Ok(power_sq(b, ones).max(power_sq(b, alt)).sqrt())
}

/// `B = B⁺ − B⁻` with `B⁺ = λI + β𝟙𝟙ᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct LVSplitting {
    pub lambda: f64,
    pub beta: f64,
    pub bplus: Vec<Vec<f64>>,
    pub bminus: Vec<Vec<f64>>,
    pub min_eig_plus: f64,
    pub min_eig_minus: f64,
}

pub(crate) fn min_eigenvalue(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    let dm = DMatrix::from_fn(n, n, |i, j| m[i][j]);
    SymmetricEigen::new(dm).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

pub fn build_splitting(b: &[Vec<f64>]) -> Result<LVSplitting> {
    let lambda = spectral_radius(b)?;
    let n = b.len();
    let mut beta: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                beta = beta.max(b[i][j]);
            }
        }
    }
    let bplus: Vec<Vec<f64>> =
        (0..n).map(|i| (0..n).map(|j| beta + if i == j { lambda } else { 0.0 }).collect()).collect();
    let bminus: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| bplus[i][j] - b[i][j]).collect()).collect();
    let min_eig_plus = min_eigenvalue(&bplus);
    let min_eig_minus = min_eigenvalue(&bminus);
    let scale = lambda.max(1.0);
    let nonneg = bplus.iter().chain(&bminus).flatten().all(|&x| x >= -1e-12 * scale);
    if !nonneg || min_eig_plus < -1e-10 * scale || min_eig_minus < -1e-10 * scale {
        return Err(Error::InvalidArgument(format!(
            "splitting invariants failed (min eigenvalues {min_eig_plus:e}, {min_eig_minus:e})"
        )));
    }
    Ok(LVSplitting { lambda, beta, bplus, bminus, min_eig_plus, min_eig_minus })
}

/// Unique root `x ≥ 0` of `A x³ + C x = v` for `A > 0, C ≥ 0, v ≥ 0`.
/// Newton from `max(v/max(C, A), 1)`, which lies right of the root, so the
/// iterates decrease monotonically; bisection if Newton stalls.
pub fn cubic_solve_monotone(a: f64, c: f64, v: f64) -> f64 {
    if v <= 0.0 {
        return 0.0;
    }
    if a == 0.0 {
        return v / c;
    }
    let p = |x: f64| (a * x * x + c) * x - v;
    let tol = 1e-13 * v.max(1.0);
    let hi = (v / c.max(a)).max(1.0);
    let mut x = hi;
    for _ in 0..200 {
        let r = p(x);
        if r.abs() < tol {
            return x;
        }
        let nx = x - r / (3.0 * a * x * x + c);
        if !(nx < x) || nx < 0.0 {
            break;
        }
        x = nx;
    }
    let (mut lo, mut hi) = (0.0, hi);
    let mut best = x;
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        let r = p(mid);
        best = mid;
        if r.abs() < tol || mid == lo || mid == hi {
            break;
        }
        if r > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if p(x).abs() < p(best).abs() {
        x
    } else {
        best
    }
}

/// Real root of the odd, strictly increasing cubic `A x³ + C x = v` for any
/// sign of `v` (`A ≥ 0`, `C ≥ 0`, not both zero).
pub fn cubic_solve_odd(a: f64, c: f64, v: f64) -> f64 {
    if v < 0.0 {
        -cubic_solve_monotone(a, c, -v)
    } else {
        cubic_solve_monotone(a, c, v)
    }
}

/// Solve `A xᵢ³ + (c0 + c1·S) xᵢ = vᵢ` with `S = Σxᵢ²`, `vᵢ ≥ 0`.
///
/// `Φ(S) = Σxᵢ(S)²` is decreasing, so the fixed point is unique. A damped
/// fixed-point iteration from `s0` is tried first; bisection on `[0, Φ(0)]`
/// finishes the job if it has not converged.
pub fn solve_s_coupled(a: f64, c0: f64, c1: f64, v: &[f64], s0: f64) -> Result<(Vec<f64>, f64)> {
    let xs = |s: f64| v.iter().map(|&vi| cubic_solve_monotone(a, c0 + c1 * s, vi)).collect::<Vec<f64>>();
    let phi = |s: f64| xs(s).iter().map(|x| x * x).sum::<f64>();
    if c1 == 0.0 {
        let x = xs(0.0);
        let s = x.iter().map(|x| x * x).sum();
        return Ok((x, s));
    }
    let tol = |s: f64| 1e-12 * s.abs().max(1.0);
    let mut s = s0.max(0.0);
    let mut omega = 1.0;
    let mut prev_diff = 0.0;
    for _ in 0..500 {
        let diff = phi(s) - s;
        if !diff.is_finite() {
            break;
        }
        if diff.abs() <= tol(s) {
            return Ok((xs(s), s));
        }
        if diff * prev_diff < 0.0 {
            omega = 0.5;
        }
        prev_diff = diff;
        s = (s + omega * diff).max(0.0);
    }
    let (mut lo, mut hi) = (0.0, phi(0.0));
    if !hi.is_finite() {
        return Err(Error::SFixedPointStalled(500));
    }
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        let g = phi(mid) - mid;
        if g.abs() <= tol(mid) || mid == lo || mid == hi {
            return Ok((xs(mid), mid));
        }
        if g > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::SFixedPointStalled(800))
}

fn v_dca(split: &LVSplitting, sys: &LVSystem, u: &[f64]) -> Vec<f64> {
    let f: Vec<f64> = u.iter().map(|x| x * x).collect();
    let bm = matvec(&split.bminus, &f);
    (0..sys.n()).map(|i| u[i] * (sys.a[i] + bm[i])).collect()
}

/// DCA for the quartic energy: `λuᵢ³ + βS uᵢ = uⁿᵢ(a + B⁻[uⁿ]²)ᵢ`, `S = Σuᵢ²`.
pub fn dca_lv_step(split: &LVSplitting, sys: &LVSystem, u: &[f64]) -> Result<Vec<f64>> {
    check_positive(u)?;
    let v = v_dca(split, sys, u);
    let s0 = u.iter().map(|x| x * x).sum();
    let (x, _) = solve_s_coupled(split.lambda, 0.0, split.beta, &v, s0)?;
    check_positive(&x).map_err(|_| Error::PositivityLost { index: x.iter().position(|v| !(*v > 0.0)).unwrap_or(0), halvings: 0 })?;
    Ok(x)
}

/// Semi-implicit Euler: `τλuᵢ³ + (2 + τβS)uᵢ = 2uⁿᵢ + τuⁿᵢ(a + B⁻[uⁿ]²)ᵢ`.
pub fn semi_implicit_lv_step(split: &LVSplitting, sys: &LVSystem, tau: f64, u: &[f64]) -> Result<Vec<f64>> {
    check_positive(u)?;
    if !(tau > 0.0) {
        return Err(Error::InvalidArgument(format!("tau must be positive, got {tau}")));
    }
    let v: Vec<f64> = v_dca(split, sys, u).iter().zip(u).map(|(vi, ui)| 2.0 * ui + tau * vi).collect();
    let s0 = u.iter().map(|x| x * x).sum();
    let (x, _) = solve_s_coupled(tau * split.lambda, 2.0, tau * split.beta, &v, s0)?;
    check_positive(&x).map_err(|_| Error::PositivityLost { index: x.iter().position(|v| !(*v > 0.0)).unwrap_or(0), halvings: 0 })?;
    Ok(x)
}
