use super::continuous::LVTrace;
use super::splitting::spectral_radius;
use super::{check_positive, energy_e, entropy_f, EntropySpec, LVSystem};
use crate::error::{Error, Result};

/// Interval bound on `max_{f ∈ Ω_ε} ‖a − Bf‖∞`:
/// `‖a‖∞ + ‖B‖∞((λ⁻¹ + B̲⁻¹)‖a‖∞ + ε)` with `B̲ = min Bᵢⱼ > 0`.
pub fn m_epsilon(sys: &LVSystem, lambda: f64, eps: f64) -> Result<f64> {
    let bmin = sys.b_min();
    if !(bmin > 0.0) {
        return Err(Error::InvalidArgument("the feasible box needs a competitive system (min B > 0)".into()));
    }
    let a_inf = sys.a.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let b_inf = sys.b.iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max);
    Ok(a_inf + b_inf * (omega_radius(sys, lambda, eps, bmin)))
}

fn omega_radius(sys: &LVSystem, lambda: f64, eps: f64, bmin: f64) -> f64 {
    let a_inf = sys.a.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    (1.0 / lambda + 1.0 / bmin) * a_inf + eps
}

fn default_eps(sys: &LVSystem) -> f64 {
    0.1 * sys.a.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

fn tau_bound(sys: &LVSystem, lambda: f64) -> Result<f64> {
    let d_inf = sys.d.iter().fold(0.0_f64, |m, x| m.max(*x));
    Ok(1.0 / (d_inf * m_epsilon(sys, lambda, default_eps(sys))?))
}

fn step_unchecked(sys: &LVSystem, lambda: f64, tau: f64, f: &[f64]) -> Vec<f64> {
    let r = sys.fitness(f);
    (0..sys.n())
        .map(|i| {
            let den = 1.0 + tau * lambda * sys.d[i] * f[i];
            f[i] * (den + tau * sys.d[i] * r[i]) / den
        })
        .collect()
}

/// `fⁿ⁺¹ᵢ = fⁿᵢ(1 + τλdᵢfⁿᵢ + τdᵢ(a − Bfⁿ)ᵢ)/(1 + τλdᵢfⁿᵢ)` with `ε = 0.1‖a‖∞`.
pub fn discrete_step_shahshahani(sys: &LVSystem, lambda: f64, tau: f64, f: &[f64]) -> Result<Vec<f64>> {
    check_positive(f)?;
    let rho = spectral_radius(&sys.b)?;
    if lambda < rho * (1.0 - 1e-12) {
        return Err(Error::InvalidArgument(format!("lambda {lambda} below the spectral radius {rho}")));
    }
    let bound = tau_bound(sys, lambda)?;
    if !(tau > 0.0 && tau < bound) {
        return Err(Error::TauTooLarge { tau, bound });
    }
    let out = step_unchecked(sys, lambda, tau, f);
    check_after(&out)?;
    Ok(out)
}

fn check_after(f: &[f64]) -> Result<()> {
    match f.iter().position(|v| !(*v > 0.0)) {
        Some(i) => Err(Error::PositivityLost { index: i, halvings: 0 }),
        None => Ok(()),
    }
}

/// Iterate the Shahshahani scheme `steps` times.
pub fn iterate_shahshahani(
    sys: &LVSystem,
    lambda: f64,
    tau: f64,
    f0: &[f64],
    steps: usize,
    entropy: Option<&EntropySpec>,
) -> Result<LVTrace> {
    check_positive(f0)?;
    let rho = spectral_radius(&sys.b)?;
    if lambda < rho * (1.0 - 1e-12) {
        return Err(Error::InvalidArgument(format!("lambda {lambda} below the spectral radius {rho}")));
    }
    let bound = tau_bound(sys, lambda)?;
    if !(tau > 0.0 && tau < bound) {
        return Err(Error::TauTooLarge { tau, bound });
    }
    let ent = |f: &[f64]| entropy.map(|s| entropy_f(s, f)).transpose();
    let mut tr = LVTrace::start(f0, energy_e(sys, f0), ent(f0)?);
    let mut f = f0.to_vec();
    for k in 1..=steps {
        f = step_unchecked(sys, lambda, tau, &f);
        check_after(&f)?;
        tr.push(k as f64 * tau, f.clone(), energy_e(sys, &f), ent(&f)?);
    }
    Ok(tr)
}

/// The four properties of the discrete scheme, checked on a trace.
#[derive(Debug, Clone, PartialEq)]
pub struct PropositionReport {
    pub m_eps: f64,
    pub radius: f64,
    pub feasible: bool,
    pub ratio_bound: f64,
    pub max_ratio: f64,
    pub ratio_ok: bool,
    pub energy_monotone: bool,
    /// Largest `Sₙ − (E(fⁿ) − E(f⁰))` over partial sums `Sₙ` of the weighted squared steps.
    pub l2_worst_excess: f64,
    pub l2_ok: bool,
}

impl PropositionReport {
    pub fn all_hold(&self) -> bool {
        self.feasible && self.ratio_ok && self.energy_monotone && self.l2_ok
    }
}

pub fn check_discrete_properties(sys: &LVSystem, lambda: f64, tau: f64, eps: f64, tr: &LVTrace) -> Result<PropositionReport> {
    let m_eps = m_epsilon(sys, lambda, eps)?;
    let radius = omega_radius(sys, lambda, eps, sys.b_min());
    let d_inf = sys.d.iter().fold(0.0_f64, |m, x| m.max(*x));
    let feasible = tr
        .states
        .iter()
        .all(|f| f.iter().all(|&x| x > 0.0 && x <= radius));
    let ratio_bound = tau * d_inf * m_eps;
    let max_ratio = tr.ratio.iter().copied().fold(0.0, f64::max);
    let energy_monotone = tr.energy_nondecreasing(1e-10);
    let mut partial = 0.0;
    let mut worst = f64::NEG_INFINITY;
    for n in 0..tr.states.len().saturating_sub(1) {
        let (f0, f1) = (&tr.states[n], &tr.states[n + 1]);
        partial += (0..sys.n()).map(|i| (f1[i] - f0[i]).powi(2) / (tau * sys.d[i] * f0[i])).sum::<f64>();
        worst = worst.max(partial - (tr.energies[n + 1] - tr.energies[0]));
    }
    let worst = if worst.is_finite() { worst } else { 0.0 };
    Ok(PropositionReport {
        m_eps,
        radius,
        feasible,
        ratio_bound,
        max_ratio,
        ratio_ok: max_ratio <= ratio_bound * (1.0 + 1e-12),
        energy_monotone,
        l2_worst_excess: worst,
        l2_ok: worst <= 1e-8,
    })
}

/// Entropy-trapping diagnostics around a candidate limit `f̃`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrapReport {
    /// Indices with `aᵢ − (Bf̃)ᵢ ≠ 0` (beyond 1e-8).
    pub k_set: Vec<usize>,
    /// `max_{i∈K} |aᵢ − (Bf̃)ᵢ|`, 0 when K is empty.
    pub m: f64,
    /// `Z(f̃)`, 1 when K is empty.
    pub z: f64,
    pub q: Vec<f64>,
    pub zs: Vec<f64>,
    pub f: Vec<f64>,
    /// First index after which `Z(fⁿ) > z/2` for every later n.
    pub tail_start: usize,
    /// `2M/z`.
    pub bound: f64,
    /// Largest `ΔF/ΔE` over tail steps with `ΔF > 0` (0 if there are none).
    pub max_ratio: f64,
    /// Tail steps with `ΔF > (2M/z)ΔE + 1e-12`.
    pub violations: usize,
    /// Steps anywhere on the trace where F increased.
    pub increases: usize,
    pub trapped: bool,
}

pub fn entropy_trap_monitor(sys: &LVSystem, tr: &LVTrace, spec: &EntropySpec) -> Result<TrapReport> {
    let ft = &spec.f_tilde;
    let rt = sys.fitness(ft);
    let k_set: Vec<usize> = (0..sys.n()).filter(|&i| rt[i].abs() > 1e-8).collect();
    let m = k_set.iter().map(|&i| rt[i].abs()).fold(0.0, f64::max);
    let zfun = |f: &[f64]| -> f64 {
        if k_set.is_empty() {
            return 1.0;
        }
        let r = sys.fitness(f);
        k_set.iter().map(|&i| sys.d[i] * r[i] * r[i]).fold(f64::INFINITY, f64::min)
    };
    let z = zfun(ft);
    let f: Vec<f64> = match &tr.entropies {
        Some(v) => v.clone(),
        None => tr.states.iter().map(|s| entropy_f(spec, s)).collect::<Result<_>>()?,
    };
    let q: Vec<f64> = tr.states.iter().map(|s| k_set.iter().map(|&i| s[i]).sum()).collect();
    let zs: Vec<f64> = tr.states.iter().map(|s| zfun(s)).collect();
    let mut tail_start = zs.len();
    for k in (0..zs.len()).rev() {
        if zs[k] > 0.5 * z {
            tail_start = k;
        } else {
            break;
        }
    }
    let bound = if k_set.is_empty() { 0.0 } else { 2.0 * m / z };
    let mut max_ratio: f64 = 0.0;
    let mut violations = 0;
    for n in tail_start..f.len().saturating_sub(1) {
        let df = f[n + 1] - f[n];
        let de = tr.energies[n + 1] - tr.energies[n];
        if df > 0.0 {
            if de > 0.0 {
                max_ratio = max_ratio.max(df / de);
            } else {
                max_ratio = f64::INFINITY;
            }
            if df > bound * de + 1e-12 {
                violations += 1;
            }
        }
    }
    let increases = f.windows(2).filter(|w| w[1] > w[0]).count();
    let trapped = violations == 0 && tail_start < f.len();
    Ok(TrapReport { k_set, m, z, q, zs, f, tail_start, bound, max_ratio, violations, increases, trapped })
}
