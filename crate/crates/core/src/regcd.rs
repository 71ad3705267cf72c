//! The ε-regularized flow `u' = ε(uᵖ)ₓₓ + K∗uᵖ − c(t)u`.

use std::f64::consts::PI;

use crate::cd::{self, evolve, flow_eval, CDTrace, ConvergenceRule, EvolveOptions, Stepper};
use crate::error::{Error, Result};
use crate::loja::{classify_decay, distances_to, DecayFit};
use crate::torus::{PeriodizedKernel, TorusGrid};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegCDConfig {
    pub epsilon: f64,
    pub grid: TorusGrid,
    pub p: f64,
    pub dt_cfl_safety: f64,
}

impl RegCDConfig {
    pub fn new(epsilon: f64, grid: TorusGrid, p: f64, dt_cfl_safety: f64) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
        }
        if !(p > 1.0) {
            return Err(Error::InvalidArgument(format!("power must exceed 1, got {p}")));
        }
        if !(dt_cfl_safety > 0.0 && dt_cfl_safety <= 1.0) {
            return Err(Error::InvalidArgument(format!("CFL safety must lie in (0, 1], got {dt_cfl_safety}")));
        }
        Ok(Self { epsilon, grid, p, dt_cfl_safety })
    }

    /// `safety·dx²/(ε·p·max u^{p−1})`.
    pub fn cfl_dt(&self, u: &[f64]) -> f64 {
        let umax = u.iter().fold(0.0f64, |m, v| m.max(*v));
        self.dt_cfl_safety * self.grid.dx * self.grid.dx / (self.epsilon * self.p * umax.powf(self.p - 1.0))
    }
}

/// `(rhs, c)`; `ε = 0` is allowed here and reproduces the unregularized right-hand side.
pub fn reg_rhs(u: &[f64], kernel: &PeriodizedKernel, p: f64, epsilon: f64) -> Result<(Vec<f64>, f64)> {
    cd::check_positive(u)?;
    let ev = flow_eval(kernel, p, epsilon, u);
    Ok((ev.rhs, ev.c))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegEnergy {
    pub e: f64,
    pub f: f64,
    pub alpha: f64,
    /// `E ≤ 0`: the F-monotonicity monitors do not apply.
    pub nonpositive: bool,
}

pub fn reg_energy(u: &[f64], kernel: &PeriodizedKernel, p: f64, epsilon: f64) -> Result<RegEnergy> {
    cd::check_positive(u)?;
    let (e, alpha, f) = cd::functionals(kernel, p, epsilon, u);
    Ok(RegEnergy { e, f, alpha, nonpositive: e <= 0.0 })
}

/// `‖ε(uᵖ)ₓₓ + K∗uᵖ − cu‖_{L²}`.
pub fn reg_residual(u: &[f64], kernel: &PeriodizedKernel, p: f64, epsilon: f64) -> f64 {
    kernel.grid.l2_norm(&flow_eval(kernel, p, epsilon, u).rhs)
}

/// `−εpλₙ² + pK̂(λₙ) − 1`, `λₙ = 2nπ/L`.
pub fn reg_stability_factor(l: f64, p: f64, epsilon: f64, khat: impl Fn(f64) -> f64, n: usize) -> f64 {
    let lam = 2.0 * PI * n as f64 / l;
    -epsilon * p * lam * lam + p * khat(lam) - 1.0
}

#[derive(Debug, Clone)]
pub struct RegTrace {
    pub trace: CDTrace,
    /// `E(u₀) ≤ 0`.
    pub energy_warning: bool,
}

/// Explicit RK4 with the CFL-limited step, run until `t_end` or the convergence rule fires.
pub fn reg_evolve(
    u0: &[f64],
    kernel: &PeriodizedKernel,
    cfg: &RegCDConfig,
    dt: f64,
    t_end: f64,
    convergence: Option<ConvergenceRule>,
    frame_every: usize,
) -> Result<RegTrace> {
    if kernel.grid != cfg.grid {
        return Err(Error::InvalidArgument("kernel and config grids differ".into()));
    }
    let energy_warning = reg_energy(u0, kernel, cfg.p, cfg.epsilon)?.nonpositive;
    let opts = EvolveOptions {
        dt,
        t_end,
        stepper: Stepper::Rk4,
        epsilon: cfg.epsilon,
        cfl_safety: cfg.dt_cfl_safety,
        frame_every,
        convergence,
        max_halvings: 30,
    };
    Ok(RegTrace { trace: evolve(u0, kernel, cfg.p, &opts)?, energy_warning })
}

/// Decay model of `‖u(t) − u_limit‖_{L²}` over the stored frames.
pub fn limit_decay(trace: &CDTrace, tail_fraction: f64) -> Result<DecayFit> {
    let states: Vec<Vec<f64>> = trace.frames.iter().map(|f| f.u.clone()).collect();
    let times: Vec<f64> = trace.frames.iter().map(|f| f.t).collect();
    let sq = trace.grid.dx.sqrt();
    let dists: Vec<f64> = distances_to(&states, &trace.final_u).iter().map(|d| d * sq).collect();
    // Drop the final frame (distance 0) and the roundoff floor near the end.
    let n = dists.len().saturating_sub(1);
    classify_decay(&times[..n], &dists[..n], tail_fraction, 1e-9)
}

#[derive(Debug, Clone)]
pub struct ContinuationPoint {
    pub epsilon: f64,
    pub u: Vec<f64>,
    pub converged: bool,
    pub t_final: f64,
    pub reg_residual: f64,
    /// Residual of the unregularized equation at the ε-limit.
    pub residual: f64,
}

/// Run `reg_evolve` for each ε in order, warm-starting from the previous limit.
pub fn epsilon_continuation(
    u0: &[f64],
    kernel: &PeriodizedKernel,
    p: f64,
    eps_list: &[f64],
    dt: f64,
    t_end: f64,
    cfl_safety: f64,
) -> Result<Vec<ContinuationPoint>> {
    let mut u = u0.to_vec();
    let mut out = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let cfg = RegCDConfig::new(eps, kernel.grid, p, cfl_safety)?;
        let run = reg_evolve(&u, kernel, &cfg, dt, t_end, Some(ConvergenceRule::default()), 0)?;
        let tr = run.trace;
        u = tr.final_u.clone();
        out.push(ContinuationPoint {
            epsilon: eps,
            converged: tr.converged_at.is_some(),
            t_final: tr.last().t,
            reg_residual: reg_residual(&u, kernel, p, eps),
            residual: cd::residual(&u, kernel, p),
            u: u.clone(),
        });
    }
    Ok(out)
}
