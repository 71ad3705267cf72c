use super::solve::solve_shifted;
use super::{IterateTrace, MomentumSpec, SolverConfig, SplitEnergy, StopReason};
use crate::error::{ensure_finite, Error, Result};
use crate::linalg::{norm, sub};

/// One DCA step: solve `∇H₊(u⁺) = ∇H₋(u)`.
pub fn dca_step(split: &SplitEnergy, u: &[f64], cfg: &SolverConfig) -> Result<Vec<f64>> {
    ensure_finite(u, "dca input")?;
    if !(split.kappa > 0.0) {
        return Err(Error::InvalidArgument("dca_step needs kappa > 0".into()));
    }
    let target = (split.grad_hminus)(u);
    let x = solve_shifted(split, 0.0, &target, u, cfg)?;
    ensure_finite(&x, "dca output")?;
    Ok(x)
}

/// One semi-implicit Euler step: `u⁺ + τ∇H₊(u⁺) = u + τ∇H₋(u)`.
pub fn semi_implicit_step(split: &SplitEnergy, tau: f64, u: &[f64], cfg: &SolverConfig) -> Result<Vec<f64>> {
    ensure_finite(u, "semi-implicit input")?;
    if !(tau > 0.0) {
        return Err(Error::InvalidArgument(format!("tau must be positive, got {tau}")));
    }
    // Divide by τ: ∇H₊(x) + x/τ = ∇H₋(u) + u/τ.
    let gm = (split.grad_hminus)(u);
    let target: Vec<f64> = gm.iter().zip(u).map(|(g, x)| g + x / tau).collect();
    let x = solve_shifted(split, 1.0 / tau, &target, u, cfg)?;
    ensure_finite(&x, "semi-implicit output")?;
    Ok(x)
}

/// DCA with momentum: `∇H₊(u⁺) = ∇H₋(u) + ∇b(u) − ∇b(u_prev)`.
pub fn momentum_step(
    split: &SplitEnergy,
    mom: &MomentumSpec,
    u_cur: &[f64],
    u_prev: &[f64],
    cfg: &SolverConfig,
) -> Result<Vec<f64>> {
    ensure_finite(u_cur, "momentum input")?;
    ensure_finite(u_prev, "momentum input")?;
    let gm = (split.grad_hminus)(u_cur);
    let b1 = (mom.grad_b)(u_cur);
    let b0 = (mom.grad_b)(u_prev);
    let target: Vec<f64> = (0..split.dim).map(|i| gm[i] + b1[i] - b0[i]).collect();
    let x = solve_shifted(split, 0.0, &target, u_cur, cfg)?;
    ensure_finite(&x, "momentum output")?;
    Ok(x)
}

fn primal_of(split: &SplitEnergy, p: &[f64], guess: &[f64], cfg: &SolverConfig) -> Result<Vec<f64>> {
    solve_shifted(split, 0.0, p, guess, cfg)
}

/// Dual DCA: `p⁺ = ∇H₋(∇H₊⁻¹(p))`.
pub fn dual_dca_step(split: &SplitEnergy, p: &[f64], cfg: &SolverConfig) -> Result<Vec<f64>> {
    if !(split.mu > 0.0) {
        return Err(Error::MissingInverse("H- is not strongly convex, so the dual energy is undefined"));
    }
    ensure_finite(p, "dual input")?;
    let u = primal_of(split, p, p, cfg)?;
    let q = (split.grad_hminus)(&u);
    ensure_finite(&q, "dual output")?;
    Ok(q)
}

/// Momentum on the dual energy: `∇H₋*(p⁺) = ∇H₊*(p) + ∇b(p) − ∇b(p_prev)`,
/// i.e. `p⁺ = ∇H₋(∇H₊⁻¹(p) + ∇b(p) − ∇b(p_prev))`. With the heavy-ball
/// splitting and quadratic `b` this is Nesterov's accelerated gradient.
pub fn dual_momentum_step(
    split: &SplitEnergy,
    mom: &MomentumSpec,
    p: &[f64],
    p_prev: &[f64],
    cfg: &SolverConfig,
) -> Result<Vec<f64>> {
    ensure_finite(p, "dual momentum input")?;
    let u = primal_of(split, p, p, cfg)?;
    let b1 = (mom.grad_b)(p);
    let b0 = (mom.grad_b)(p_prev);
    let y: Vec<f64> = (0..split.dim).map(|i| u[i] + b1[i] - b0[i]).collect();
    let q = (split.grad_hminus)(&y);
    ensure_finite(&q, "dual momentum output")?;
    Ok(q)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Dca,
    SemiImplicit,
    Momentum,
    Dual,
    /// Momentum applied to the dual iterates (Nesterov-type).
    DualMomentum,
}

impl Scheme {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "dca" => Scheme::Dca,
            "semi_implicit" => Scheme::SemiImplicit,
            "momentum" | "polyak" => Scheme::Momentum,
            "dual" => Scheme::Dual,
            "dual_momentum" | "nesterov" => Scheme::DualMomentum,
            _ => return None,
        })
    }
}

const DIVERGENCE_NORM: f64 = 1e12;

/// Iterate a scheme until the gradient or step tolerance fires, `max_iters`
/// is reached, or the iterates blow up (recorded as `StopReason::Diverged`).
/// Dual schemes record primal states `uⁿ = ∇H₊⁻¹(pⁿ)` plus the duals.
pub fn run(
    scheme: Scheme,
    split: &SplitEnergy,
    mom: Option<&MomentumSpec>,
    u0: &[f64],
    cfg: &SolverConfig,
) -> Result<IterateTrace> {
    cfg.validate()?;
    ensure_finite(u0, "initial state")?;
    if u0.len() != split.dim {
        return Err(Error::InvalidArgument(format!("u0 has length {}, expected {}", u0.len(), split.dim)));
    }
    let zero = MomentumSpec::zero();
    let mom = mom.unwrap_or(&zero);
    let dual = matches!(scheme, Scheme::Dual | Scheme::DualMomentum);

    let mut states = vec![u0.to_vec()];
    let mut energies = vec![split.h(u0)];
    let mut grad_norms = vec![norm(&split.grad(u0))];
    let mut step_norms = Vec::new();
    let mut duals = dual.then(|| vec![(split.grad_hplus)(u0)]);
    let mut stop = StopReason::MaxIters;

    for _ in 0..cfg.max_iters {
        if *grad_norms.last().unwrap() < cfg.grad_tol {
            stop = StopReason::GradientTol;
            break;
        }
        let u = states.last().unwrap();
        let prev = if states.len() >= 2 { &states[states.len() - 2] } else { u };
        let next = match scheme {
            Scheme::Dca => dca_step(split, u, cfg),
            Scheme::SemiImplicit => semi_implicit_step(split, cfg.tau, u, cfg),
            Scheme::Momentum => momentum_step(split, mom, u, prev, cfg),
            Scheme::Dual | Scheme::DualMomentum => {
                let ps = duals.as_mut().unwrap();
                let p = ps.last().unwrap();
                let p_prev = if ps.len() >= 2 { &ps[ps.len() - 2] } else { p };
                let q = if scheme == Scheme::Dual {
                    dual_dca_step(split, p, cfg)
                } else {
                    dual_momentum_step(split, mom, p, p_prev, cfg)
                };
                match q {
                    Ok(q) => {
                        let u_new = primal_of(split, &q, u, cfg);
                        ps.push(q);
                        u_new
                    }
                    Err(e) => Err(e),
                }
            }
        };
        let next = match next {
            Ok(x) => x,
            Err(Error::NonFinite(_)) => {
                stop = StopReason::Diverged;
                break;
            }
            Err(e) => return Err(e),
        };
        if norm(&next) > DIVERGENCE_NORM {
            if let Some(ps) = duals.as_mut() {
                ps.pop();
            }
            stop = StopReason::Diverged;
            break;
        }
        let step = norm(&sub(&next, u));
        energies.push(split.h(&next));
        grad_norms.push(norm(&split.grad(&next)));
        step_norms.push(step);
        states.push(next);
        if step < cfg.step_tol {
            stop = StopReason::StepTol;
            break;
        }
    }
    if stop == StopReason::MaxIters && *grad_norms.last().unwrap() < cfg.grad_tol {
        stop = StopReason::GradientTol;
    }
    Ok(IterateTrace { states, energies, step_norms, grad_norms, stop_reason: stop, duals })
}
