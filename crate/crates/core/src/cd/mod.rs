//! Concentration-dispersion flow `u' = K∗uᵖ − c(t)u` on the torus.

mod evolve;
mod monitors;
mod petviashvili;

pub use evolve::{evolve, flow_eval, ConvergenceRule, EvolveOptions, FlowEval, Frame, Stepper, CDTrace};
pub use monitors::{functional_monitors, pointwise_bounds, BoundsReport, MonitorReport};
pub use petviashvili::{align, petviashvili, petviashvili_step, PetviashviliOptions, PetviashviliRun};

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::torus::{PeriodizedKernel, TorusGrid};

#[derive(Debug, Clone, PartialEq)]
pub struct CDState {
    pub grid: TorusGrid,
    pub u: Vec<f64>,
    pub p: f64,
}

impl CDState {
    pub fn new(grid: TorusGrid, u: Vec<f64>, p: f64) -> Result<Self> {
        if !(p > 1.0) {
            return Err(Error::InvalidArgument(format!("power must exceed 1, got {p}")));
        }
        if u.len() != grid.n {
            return Err(Error::InvalidArgument(format!("state has {} nodes, grid has {}", u.len(), grid.n)));
        }
        check_positive(&u)?;
        Ok(Self { grid, u, p })
    }

    /// `‖u‖_{L^{p+1}}`.
    pub fn lp1_norm(&self) -> f64 {
        lp_norm(&self.grid, &self.u, self.p + 1.0)
    }
}

/// Per-step diagnostics of the flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FunctionalRecord {
    pub t: f64,
    pub dt: f64,
    pub e: f64,
    pub alpha: f64,
    pub f: f64,
    pub c: f64,
    pub lp1_norm: f64,
    pub u_min: f64,
    pub u_max: f64,
    pub ux_max: f64,
    pub uxx_max: f64,
    pub uxxx_max: f64,
    /// `‖K∗uᵖ − c₀u‖_{L²}` with the unregularized `c₀ = ∫uᵖK∗uᵖ`.
    pub residual: f64,
    /// `‖ε(uᵖ)ₓₓ + K∗uᵖ − cu‖_{L²}`, equal to `residual` when `ε = 0`.
    pub reg_residual: f64,
    /// `‖u'‖_{L²}` at this state.
    pub du_norm: f64,
    pub epsilon: f64,
}

pub(crate) fn check_positive(u: &[f64]) -> Result<()> {
    for (index, &value) in u.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::NonFinite("grid function"));
        }
        if value <= 0.0 {
            return Err(Error::NonPositiveState { index, value });
        }
    }
    Ok(())
}

/// `uᵖ`, extended oddly to negative values for non-integer `p`.
pub(crate) fn pow_p(u: &[f64], p: f64) -> Vec<f64> {
    if p.fract() == 0.0 && p.abs() < 64.0 {
        let k = p as i32;
        u.iter().map(|v| v.powi(k)).collect()
    } else {
        u.iter().map(|v| v.signum() * v.abs().powf(p)).collect()
    }
}

pub fn lp_norm(grid: &TorusGrid, u: &[f64], q: f64) -> f64 {
    grid.integrate(&u.iter().map(|v| v.abs().powf(q)).collect::<Vec<_>>()).powf(1.0 / q)
}

/// `(rhs, c)` for the unregularized flow.
pub fn cd_rhs(state: &CDState, kernel: &PeriodizedKernel) -> Result<(Vec<f64>, f64)> {
    check_positive(&state.u)?;
    let ev = flow_eval(kernel, state.p, 0.0, &state.u);
    Ok((ev.rhs, ev.c))
}

/// `(E, α, F)` with `E = (1/2p)(∫uᵖK∗uᵖ − ε∫[(uᵖ)ₓ]²)`, `α = exp((2p/(p+1))∫u^{p+1})`.
pub fn functionals(kernel: &PeriodizedKernel, p: f64, epsilon: f64, u: &[f64]) -> (f64, f64, f64) {
    let ev = flow_eval(kernel, p, epsilon, u);
    let alpha = alpha_of(&kernel.grid, p, u);
    (ev.e, alpha, ev.e / alpha)
}

pub(crate) fn alpha_of(grid: &TorusGrid, p: f64, u: &[f64]) -> f64 {
    let i = grid.integrate(&u.iter().map(|v| v.abs().powf(p + 1.0)).collect::<Vec<_>>());
    (2.0 * p / (p + 1.0) * i).exp()
}

/// `‖K∗uᵖ − cu‖_{L²}` with `c = ∫uᵖK∗uᵖ`. Meaningful for states on `∫u^{p+1} = 1`.
pub fn residual(u: &[f64], kernel: &PeriodizedKernel, p: f64) -> f64 {
    let grid = &kernel.grid;
    let up = pow_p(u, p);
    let ku = kernel.convolve(&up);
    let c = grid.integrate(&up.iter().zip(&ku).map(|(a, b)| a * b).collect::<Vec<_>>());
    grid.l2_norm(&ku.iter().zip(u).map(|(k, v)| k - c * v).collect::<Vec<_>>())
}

/// `‖K∗uᵖ − u‖_{L²}`, the residual of the unnormalized fixed-point form.
pub fn fixed_point_residual(u: &[f64], kernel: &PeriodizedKernel, p: f64) -> f64 {
    let ku = kernel.convolve(&pow_p(u, p));
    kernel.grid.l2_norm(&ku.iter().zip(u).map(|(k, v)| k - v).collect::<Vec<_>>())
}

/// Rescale to `‖u‖_{L^{p+1}} = 1`.
pub fn normalize(grid: &TorusGrid, u: &[f64], p: f64) -> Vec<f64> {
    let s = lp_norm(grid, u, p + 1.0);
    u.iter().map(|v| v / s).collect()
}

/// `ū = L^{−1/(p+1)}`, the constant state on `∫u^{p+1} = 1`.
pub fn constant_equilibrium(l: f64, p: f64) -> f64 {
    l.powf(-1.0 / (p + 1.0))
}

/// `ū + δcos(2πx/L)`, optionally rescaled onto `‖u‖_{p+1} = 1`.
pub fn seed_initial(grid: TorusGrid, p: f64, delta: f64, normalize_seed: bool) -> Result<CDState> {
    let ubar = constant_equilibrium(grid.l, p);
    if delta.abs() >= ubar {
        return Err(Error::DeltaTooLarge { delta, ubar });
    }
    let u: Vec<f64> = grid.nodes().iter().map(|x| ubar + delta * (2.0 * PI * x / grid.l).cos()).collect();
    let u = if normalize_seed { normalize(&grid, &u, p) } else { u };
    CDState::new(grid, u, p)
}

/// Even about `x = 0` and nonincreasing on `(0, L/2)`, both up to `tol·‖u‖∞`.
pub fn is_bell_shaped(u: &[f64], tol: f64) -> bool {
    let n = u.len();
    if n < 2 || n % 2 != 0 {
        return false;
    }
    let scale = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let slack = tol * scale;
    let c = n / 2;
    for j in 1..c {
        if (u[c + j] - u[c - j]).abs() > slack {
            return false;
        }
    }
    // Right half, x = 0 up to x = L/2 (index 0 by periodicity).
    let right = |j: usize| u[(c + j) % n];
    (0..c).all(|j| right(j + 1) <= right(j) + slack)
}

/// Spectrum of `D²F(ū)` restricted to Fourier modes.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilitySpectrum {
    pub ubar: f64,
    pub prefactor: f64,
    pub constant_mode: f64,
    /// `p·K̂(2nπ/L) − 1` for `n = 1..`.
    pub factors: Vec<f64>,
    pub eigenvalues: Vec<f64>,
}

impl StabilitySpectrum {
    pub fn unstable(&self) -> bool {
        self.eigenvalues.iter().any(|&e| e > 0.0)
    }
}

pub fn stability_spectrum(l: f64, p: f64, khat: impl Fn(f64) -> f64, n_modes: usize) -> StabilitySpectrum {
    let ubar = constant_equilibrium(l, p);
    let prefactor = (-2.0 * p / (p + 1.0)).exp() * ubar.powf(2.0 * p - 2.0);
    let factors: Vec<f64> = (1..=n_modes).map(|n| p * khat(2.0 * PI * n as f64 / l) - 1.0).collect();
    StabilitySpectrum {
        ubar,
        prefactor,
        constant_mode: -prefactor * (p + 1.0),
        eigenvalues: factors.iter().map(|f| prefactor * f).collect(),
        factors,
    }
}

/// Mode factor with `K̂` evaluated by quadrature of the sampled periodized kernel.
pub fn mode_factor_quadrature(kernel: &PeriodizedKernel, p: f64, n: usize) -> f64 {
    p * kernel.spectrum_quadrature(2.0 * PI * n as f64 / kernel.grid.l) - 1.0
}
