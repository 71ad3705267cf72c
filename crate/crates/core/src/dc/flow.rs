use crate::error::{ensure_finite, Result};
use crate::linalg::norm;
use crate::ode::rk4_step;

/// Samples of a continuous gradient flow `u' = −∇E(u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowTrace {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub energies: Vec<f64>,
    pub grad_norms: Vec<f64>,
}

/// RK4 integration of `u' = −∇E(u)` with fixed step `dt`, recording every
/// `record_every` steps (and the final state).
pub fn gradient_flow<E, G>(
    energy: E,
    grad: G,
    u0: &[f64],
    dt: f64,
    t_end: f64,
    record_every: usize,
) -> Result<FlowTrace>
where
    E: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vec<f64>,
{
    ensure_finite(u0, "flow initial state")?;
    let rhs = |u: &[f64]| grad(u).into_iter().map(|g| -g).collect::<Vec<_>>();
    let every = record_every.max(1);
    let steps = (t_end / dt).round() as usize;
    let mut u = u0.to_vec();
    let mut tr = FlowTrace { times: vec![0.0], states: vec![u.clone()], energies: vec![energy(&u)], grad_norms: vec![norm(&grad(&u))] };
    for k in 1..=steps {
        u = rk4_step(&rhs, &u, dt);
        ensure_finite(&u, "flow state")?;
        if k % every == 0 || k == steps {
            tr.times.push(k as f64 * dt);
            tr.energies.push(energy(&u));
            tr.grad_norms.push(norm(&grad(&u)));
            tr.states.push(u.clone());
        }
    }
    Ok(tr)
}
