//! `∂ₜu = Δu + ½u(a − ∫b u²)` on `[0, 1]` with zero-flux boundary.

use super::{check_positive, LVSystem};
use crate::error::{Error, Result};

/// Cell-centred mesh `xⱼ = (j + ½)h`, `h = 1/n`, with the coefficients sampled
/// at the nodes. `diffusion = 0` drops the Laplacian.
#[derive(Debug, Clone, PartialEq)]
pub struct MutationGrid {
    pub n: usize,
    pub h: f64,
    pub x: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<Vec<f64>>,
    pub diffusion: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MutationStepInfo {
    /// `1 / (Gershgorin bound of the reaction Jacobian)` at the input state;
    /// energy decrease is monitored for steps below it.
    pub dt_threshold: f64,
}

impl MutationGrid {
    pub fn new(n: usize, a: impl Fn(f64) -> f64, b: impl Fn(f64, f64) -> f64, diffusion: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument("mutation grid needs at least 2 nodes".into()));
        }
        if !(diffusion >= 0.0) {
            return Err(Error::InvalidArgument("diffusion must be nonnegative".into()));
        }
        let h = 1.0 / n as f64;
        let x: Vec<f64> = (0..n).map(|j| (j as f64 + 0.5) * h).collect();
        let av: Vec<f64> = x.iter().map(|&xi| a(xi)).collect();
        let bm: Vec<Vec<f64>> = x.iter().map(|&xi| x.iter().map(|&yj| b(xi, yj)).collect()).collect();
        if super::max_asymmetry(&bm) > 1e-12 {
            return Err(Error::NotSymmetric(super::max_asymmetry(&bm)));
        }
        Ok(Self { n, h, x, a: av, b: bm, diffusion })
    }

    /// `(∫b(xⱼ, y)u²(y)dy)ⱼ` by the midpoint rule.
    fn nonlocal(&self, u: &[f64]) -> Vec<f64> {
        self.b
            .iter()
            .map(|row| row.iter().zip(u).map(|(b, v)| b * v * v).sum::<f64>() * self.h)
            .collect()
    }

    pub fn reaction(&self, u: &[f64]) -> Vec<f64> {
        let nl = self.nonlocal(u);
        (0..self.n).map(|j| 0.5 * u[j] * (self.a[j] - nl[j])).collect()
    }

    /// `H(u) = ⅛∬b u²u² − ¼∫a u² + (D/2)∫|∇u|²`, discretized consistently with the step.
    pub fn energy(&self, u: &[f64]) -> f64 {
        let nl = self.nonlocal(u);
        let h = self.h;
        let quartic: f64 = (0..self.n).map(|j| u[j] * u[j] * nl[j]).sum::<f64>() * h / 8.0;
        let growth: f64 = (0..self.n).map(|j| self.a[j] * u[j] * u[j]).sum::<f64>() * h / 4.0;
        let grad: f64 = u.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum::<f64>() / h;
        quartic - growth + 0.5 * self.diffusion * grad
    }

    fn dt_threshold(&self, u: &[f64]) -> f64 {
        let nl = self.nonlocal(u);
        let mut g: f64 = 0.0;
        for j in 0..self.n {
            let mut row = (0.5 * (self.a[j] - nl[j])).abs();
            for k in 0..self.n {
                let off = u[j] * self.b[j][k] * u[k] * self.h;
                row += off.abs();
            }
            g = g.max(row);
        }
        if g > 0.0 {
            1.0 / g
        } else {
            f64::INFINITY
        }
    }

    /// Backward Euler for the Laplacian, forward Euler for the reaction.
    pub fn step(&self, dt: f64, u: &[f64]) -> Result<(Vec<f64>, MutationStepInfo)> {
        check_positive(u)?;
        if u.len() != self.n {
            return Err(Error::InvalidArgument("state length does not match the grid".into()));
        }
        if !(dt > 0.0) {
            return Err(Error::InvalidArgument("dt must be positive".into()));
        }
        let info = MutationStepInfo { dt_threshold: self.dt_threshold(u) };
        let r = self.reaction(u);
        let rhs: Vec<f64> = (0..self.n).map(|j| u[j] + dt * r[j]).collect();
        let out = if self.diffusion == 0.0 {
            rhs
        } else {
            let k = dt * self.diffusion / (self.h * self.h);
            let lower = vec![-k; self.n];
            let upper = vec![-k; self.n];
            let mut diag = vec![1.0 + 2.0 * k; self.n];
            diag[0] = 1.0 + k;
            diag[self.n - 1] = 1.0 + k;
            thomas(&lower, &diag, &upper, &rhs)
        };
        if let Some(i) = out.iter().position(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::PositivityLost { index: i, halvings: 0 });
        }
        Ok((out, info))
    }

    /// The node-wise ODE obtained without diffusion: `a = a(xⱼ)`, `B = h·b`, `d = 1`.
    pub fn node_system(&self) -> Result<LVSystem> {
        let b = self.b.iter().map(|r| r.iter().map(|v| v * self.h).collect()).collect();
        LVSystem::new(self.a.clone(), b, vec![1.0; self.n])
    }
}

/// Tridiagonal solve; `lower[0]` and `upper[n-1]` are ignored.
fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - lower[i] * c[i - 1];
        c[i] = if i + 1 < n { upper[i] / m } else { 0.0 };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}
