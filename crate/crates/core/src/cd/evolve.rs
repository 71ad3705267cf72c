use num_complex::Complex64;

use super::{alpha_of, check_positive, lp_norm, pow_p, FunctionalRecord};
use crate::error::{Error, Result};
use crate::torus::{PeriodizedKernel, TorusGrid};

/// Everything derived from one evaluation of `uᵖ`.
#[derive(Debug, Clone)]
pub struct FlowEval {
    pub up: Vec<f64>,
    /// `K∗uᵖ`.
    pub kup: Vec<f64>,
    /// `(uᵖ)ₓₓ`, empty when `ε = 0`.
    pub upxx: Vec<f64>,
    /// `∫uᵖK∗uᵖ`.
    pub c0: f64,
    /// `c0 − ε∫[(uᵖ)ₓ]²`.
    pub c: f64,
    /// `c/2p`.
    pub e: f64,
    /// `ε(uᵖ)ₓₓ + K∗uᵖ − cu`.
    pub rhs: Vec<f64>,
}

pub fn flow_eval(kernel: &PeriodizedKernel, p: f64, epsilon: f64, u: &[f64]) -> FlowEval {
    let grid = &kernel.grid;
    let sp = &kernel.spectral;
    let up = pow_p(u, p);
    let hat = sp.forward(&up);
    let kup = sp.inverse(hat.iter().zip(&kernel.multiplier).map(|(c, m)| c * m).collect());
    let c0 = grid.integrate(&up.iter().zip(&kup).map(|(a, b)| a * b).collect::<Vec<_>>());
    let (upxx, c) = if epsilon != 0.0 {
        let d2 = sp.inverse(hat.iter().zip(sp.k()).map(|(c, k)| c * (-k * k)).collect());
        // ∫[(uᵖ)ₓ]² = −∫uᵖ(uᵖ)ₓₓ holds exactly for the spectral operators.
        let grad2 = -grid.integrate(&up.iter().zip(&d2).map(|(a, b)| a * b).collect::<Vec<_>>());
        (d2, c0 - epsilon * grad2)
    } else {
        (Vec::new(), c0)
    };
    let mut rhs: Vec<f64> = kup.iter().zip(u).map(|(k, v)| k - c * v).collect();
    if epsilon != 0.0 {
        for (r, d) in rhs.iter_mut().zip(&upxx) {
            *r += epsilon * d;
        }
    }
    FlowEval { up, kup, upxx, c0, c, e: c / (2.0 * p), rhs }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stepper {
    Rk4,
    /// Exponential midpoint on `u' = N(u) − c(u)u` with `c` frozen per stage.
    IntegratingFactor,
}

impl Stepper {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "rk4" => Ok(Stepper::Rk4),
            "integrating_factor" => Ok(Stepper::IntegratingFactor),
            other => Err(Error::UnknownEntry(other.to_string())),
        }
    }
}

/// Declare convergence once `‖u'‖_{L²} < tol` for `sustain` consecutive steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRule {
    pub tol: f64,
    pub sustain: usize,
    pub stop: bool,
}

impl Default for ConvergenceRule {
    fn default() -> Self {
        Self { tol: 1e-9, sustain: 100, stop: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolveOptions {
    pub dt: f64,
    pub t_end: f64,
    pub stepper: Stepper,
    pub epsilon: f64,
    /// CFL safety factor for the degenerate diffusion; only used when `ε > 0`.
    pub cfl_safety: f64,
    /// Store the state every this many steps (0 disables frames).
    pub frame_every: usize,
    pub convergence: Option<ConvergenceRule>,
    pub max_halvings: u32,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            dt: 0.1,
            t_end: 100.0,
            stepper: Stepper::Rk4,
            epsilon: 0.0,
            cfl_safety: 0.25,
            frame_every: 0,
            convergence: None,
            max_halvings: 30,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub t: f64,
    pub u: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct CDTrace {
    pub grid: TorusGrid,
    pub p: f64,
    pub epsilon: f64,
    pub records: Vec<FunctionalRecord>,
    pub frames: Vec<Frame>,
    pub final_u: Vec<f64>,
    pub converged_at: Option<f64>,
    pub halvings: usize,
    /// Smallest CFL-limited step seen (`∞` without diffusion).
    pub min_cfl_dt: f64,
}

impl CDTrace {
    pub fn last(&self) -> &FunctionalRecord {
        self.records.last().expect("trace has an initial record")
    }
}

fn record(kernel: &PeriodizedKernel, p: f64, epsilon: f64, t: f64, dt: f64, u: &[f64], ev: &FlowEval) -> FunctionalRecord {
    let grid = &kernel.grid;
    let sp = &kernel.spectral;
    let hat = sp.forward(u);
    let i = Complex64::new(0.0, 1.0);
    let dmax = |order: u32| {
        let d = sp.inverse(hat.iter().zip(sp.k()).map(|(c, k)| c * (i * k).powu(order)).collect());
        d.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    };
    let alpha = alpha_of(grid, p, u);
    let res0 = grid.l2_norm(&ev.kup.iter().zip(u).map(|(k, v)| k - ev.c0 * v).collect::<Vec<_>>());
    let du = grid.l2_norm(&ev.rhs);
    FunctionalRecord {
        t,
        dt,
        e: ev.e,
        alpha,
        f: ev.e / alpha,
        c: ev.c,
        lp1_norm: lp_norm(grid, u, p + 1.0),
        u_min: u.iter().copied().fold(f64::INFINITY, f64::min),
        u_max: u.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        ux_max: dmax(1),
        uxx_max: dmax(2),
        uxxx_max: dmax(3),
        residual: res0,
        reg_residual: if epsilon == 0.0 { res0 } else { du },
        du_norm: du,
        epsilon,
    }
}

fn rk4(kernel: &PeriodizedKernel, p: f64, eps: f64, u: &[f64], k1: &[f64], h: f64) -> Vec<f64> {
    let stage = |k: &[f64], a: f64| -> Vec<f64> { u.iter().zip(k).map(|(x, d)| x + a * d).collect() };
    let k2 = flow_eval(kernel, p, eps, &stage(k1, 0.5 * h)).rhs;
    let k3 = flow_eval(kernel, p, eps, &stage(&k2, 0.5 * h)).rhs;
    let k4 = flow_eval(kernel, p, eps, &stage(&k3, h)).rhs;
    (0..u.len()).map(|j| u[j] + h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])).collect()
}

/// `φ(c, h) = (1 − e^{−ch})/c`.
fn phi(c: f64, h: f64) -> f64 {
    let z = c * h;
    if z.abs() < 1e-8 {
        h * (1.0 - 0.5 * z)
    } else {
        -(-z).exp_m1() / c
    }
}

fn exp_midpoint(kernel: &PeriodizedKernel, p: f64, u: &[f64], ev: &FlowEval, h: f64) -> Vec<f64> {
    let half: Vec<f64> = u
        .iter()
        .zip(&ev.kup)
        .map(|(x, n)| (-ev.c * 0.5 * h).exp() * x + phi(ev.c, 0.5 * h) * n)
        .collect();
    let mid = flow_eval(kernel, p, 0.0, &half);
    u.iter().zip(&mid.kup).map(|(x, n)| (-mid.c * h).exp() * x + phi(mid.c, h) * n).collect()
}

/// Integrate from `u0` to `t_end`, halving steps that would lose positivity.
pub fn evolve(u0: &[f64], kernel: &PeriodizedKernel, p: f64, opts: &EvolveOptions) -> Result<CDTrace> {
    if !(opts.dt > 0.0) || !(opts.t_end >= 0.0) {
        return Err(Error::InvalidArgument(format!("need dt > 0 and t_end ≥ 0, got {} and {}", opts.dt, opts.t_end)));
    }
    if !(p > 1.0) {
        return Err(Error::InvalidArgument(format!("power must exceed 1, got {p}")));
    }
    let eps = opts.epsilon;
    if eps < 0.0 {
        return Err(Error::InvalidArgument(format!("epsilon must be nonnegative, got {eps}")));
    }
    if eps > 0.0 && opts.stepper != Stepper::Rk4 {
        return Err(Error::InvalidArgument("the integrating-factor stepper has no diffusion term".into()));
    }
    if eps > 0.0 && !(opts.cfl_safety > 0.0 && opts.cfl_safety <= 1.0) {
        return Err(Error::InvalidArgument(format!("CFL safety must lie in (0, 1], got {}", opts.cfl_safety)));
    }
    let grid = kernel.grid;
    if u0.len() != grid.n {
        return Err(Error::InvalidArgument(format!("state has {} nodes, grid has {}", u0.len(), grid.n)));
    }
    check_positive(u0)?;

    let mut u = u0.to_vec();
    let mut ev = flow_eval(kernel, p, eps, &u);
    let mut trace = CDTrace {
        grid,
        p,
        epsilon: eps,
        records: vec![record(kernel, p, eps, 0.0, 0.0, &u, &ev)],
        frames: Vec::new(),
        final_u: Vec::new(),
        converged_at: None,
        halvings: 0,
        min_cfl_dt: f64::INFINITY,
    };
    if opts.frame_every > 0 {
        trace.frames.push(Frame { t: 0.0, u: u.clone() });
    }
    let mut t = 0.0;
    let mut step = 0usize;
    let mut streak = 0usize;
    let t_stop = opts.t_end * (1.0 - 1e-14);
    while t < t_stop {
        let mut h = opts.dt.min(opts.t_end - t);
        if eps > 0.0 {
            let umax = u.iter().fold(0.0f64, |m, v| m.max(*v));
            let cfl = opts.cfl_safety * grid.dx * grid.dx / (eps * p * umax.powf(p - 1.0));
            trace.min_cfl_dt = trace.min_cfl_dt.min(cfl);
            if cfl < 1e-12 {
                return Err(Error::CflStall(cfl));
            }
            h = h.min(cfl);
        }
        let mut halvings = 0u32;
        let next = loop {
            let cand = match opts.stepper {
                Stepper::Rk4 => rk4(kernel, p, eps, &u, &ev.rhs, h),
                Stepper::IntegratingFactor => exp_midpoint(kernel, p, &u, &ev, h),
            };
            if cand.iter().all(|v| v.is_finite() && *v > 0.0) {
                break cand;
            }
            if halvings == opts.max_halvings {
                if cand.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite("flow state"));
                }
                let (index, _) = cand.iter().enumerate().fold((0, f64::INFINITY), |b, (i, v)| if *v < b.1 { (i, *v) } else { b });
                return Err(Error::PositivityLost { index, halvings: halvings as usize });
            }
            halvings += 1;
            h *= 0.5;
        };
        trace.halvings += halvings as usize;
        t += h;
        step += 1;
        u = next;
        ev = flow_eval(kernel, p, eps, &u);
        let rec = record(kernel, p, eps, t, h, &u, &ev);
        if !rec.e.is_finite() || !rec.du_norm.is_finite() {
            return Err(Error::NonFinite("flow functionals"));
        }
        trace.records.push(rec);
        if opts.frame_every > 0 && step % opts.frame_every == 0 {
            trace.frames.push(Frame { t, u: u.clone() });
        }
        if let Some(rule) = opts.convergence {
            if rec.du_norm < rule.tol {
                streak += 1;
                if streak >= rule.sustain && trace.converged_at.is_none() {
                    trace.converged_at = Some(t);
                    if rule.stop {
                        break;
                    }
                }
            } else {
                streak = 0;
            }
        }
    }
    if opts.frame_every > 0 && trace.frames.last().map(|f| f.t) != Some(t) {
        trace.frames.push(Frame { t, u: u.clone() });
    }
    trace.final_u = u;
    Ok(trace)
}
