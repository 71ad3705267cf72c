//! Scenario execution and the summary file.

use std::path::Path;
use std::sync::Arc;

use gradflow::cd::{
    evolve, functional_monitors, is_bell_shaped, petviashvili, pointwise_bounds, seed_initial, align, constant_equilibrium,
    CDTrace, ConvergenceRule, EvolveOptions, PetviashviliOptions, Stepper,
};
use gradflow::dc::energies::lookup;
use gradflow::dc::{check_strong_descent, momentum_surrogate, run, IterateTrace, MomentumSpec, Scheme, SolverConfig, SplitEnergy, StopReason};
use gradflow::linalg::norm_inf;
use gradflow::loja::{estimate_exponent, FitOptions, HLimit};
use gradflow::lv::{
    build_splitting, check_discrete_properties, dca_lv_step, energy_e, entropy_trap_monitor, integrate_continuous,
    integrate_sqrt, iterate_shahshahani, m_epsilon, semi_implicit_lv_step, spectral_radius, sqrt_energy, EntropySpec,
    LVSystem, LVTrace, MutationGrid,
};
use gradflow::regcd::{limit_decay, reg_evolve, reg_residual, RegCDConfig};
use gradflow::torus::{periodize, KernelSpec, PeriodizedKernel, TorusGrid};
use rayon::prelude::*;
use serde::Serialize;

use crate::artifacts::{fmt_f64, sampled, Table};
use crate::config::Scenario;
use crate::error::{HarnessError, Result};
use crate::params::*;
use crate::trace::{diagnose_trace, fit_options, read_trace};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Monitor {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

fn monitor(name: &str, pass: bool, detail: impl Into<String>) -> Monitor {
    Monitor { name: name.to_string(), pass, detail: detail.into() }
}

/// Monitors and artifact bytes of one scenario, before anything touches disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub monitors: Vec<Monitor>,
    pub artifacts: Vec<(&'static str, Vec<u8>)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioResult {
    pub id: String,
    pub kind: &'static str,
    pub seed: u64,
    pub status: &'static str,
    pub error: Option<String>,
    pub monitors: Vec<Monitor>,
    pub outputs: Vec<String>,
}

impl ScenarioResult {
    pub fn passed(&self) -> bool {
        self.status == "pass"
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub all_pass: bool,
    pub scenarios: Vec<ScenarioResult>,
}

fn json<T: Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(v).expect("report serializes");
    s.push(b'\n');
    s
}

fn worst(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(0.0, f64::max)
}

/// Run one scenario in memory.
pub fn run_scenario(s: &Scenario) -> Result<Outcome> {
    match &s.params {
        Params::Optimize(p) => optimize(p),
        Params::LvContinuous(p) => lv_continuous(p, s.seed),
        Params::LvDiscrete(p) => lv_discrete(p, s.seed),
        Params::LvMutation(p) => lv_mutation(p),
        Params::Cd(p) => cd(p),
        Params::Regcd(p) => regcd(p),
        Params::Petviashvili(p) => petviashvili_run(p),
        Params::Diagnose(p) => diagnose_run(p),
    }
}

fn optimize(p: &OptimizeParams) -> Result<Outcome> {
    let e = lookup(&p.energy, p.dim)?;
    let split = match p.splitting {
        Splitting::Registry => e.split.clone(),
        Splitting::Polyak => {
            let (a, b) = (e.split.clone(), e.split.clone());
            let lip = p.lip.unwrap_or(e.split.lip_l);
            SplitEnergy::polyak(p.dim, Arc::new(move |u| a.h(u)), Arc::new(move |u| b.grad(u)), p.tau, lip)?
        }
    };
    let scheme = Scheme::parse(&p.scheme).ok_or_else(|| HarnessError::validation("", "scheme", p.scheme.clone()))?;
    let km = 0.5 * (split.kappa + split.mu);
    let beta = p.beta.or(p.beta_fraction.map(|f| f * km)).unwrap_or(0.0);
    let mom = MomentumSpec::quadratic(beta)?;
    let cfg = SolverConfig {
        max_iters: p.max_iters,
        grad_tol: p.grad_tol,
        step_tol: p.step_tol,
        tau: p.tau,
        ..SolverConfig::default()
    };
    let u0 = p.u0.clone().unwrap_or_else(|| e.default_u0.clone());
    let tr = run(scheme, &split, Some(&mom), &u0, &cfg)?;

    let mut mons = vec![monitor("not_diverged", tr.stop_reason != StopReason::Diverged, tr.stop_reason.as_str())];
    match scheme {
        Scheme::Dca | Scheme::SemiImplicit | Scheme::Dual => {
            let m = (0..tr.step_norms.len())
                .map(|k| tr.energies[k] - tr.energies[k + 1] - km * tr.step_norms[k].powi(2))
                .fold(f64::INFINITY, f64::min);
            let m = if m.is_finite() { m } else { 0.0 };
            mons.push(monitor("energy_descent", m >= -p.descent_slack, format!("worst margin {}", fmt_f64(m))));
        }
        Scheme::Momentum => {
            let sur = momentum_surrogate(&tr, split.kappa, split.mu);
            let rise = worst(sur.windows(2).map(|w| w[1] - w[0]));
            mons.push(monitor("surrogate_nonincreasing", rise <= p.descent_slack, format!("largest rise {}", fmt_f64(rise))));
        }
        Scheme::DualMomentum => {}
    }
    if p.expect_converged {
        let g = *tr.grad_norms.last().unwrap();
        mons.push(monitor("converged", tr.stop_reason == StopReason::GradientTol, format!("final gradient norm {}", fmt_f64(g))));
    }
    if let Some(sigma) = p.sigma {
        let r = check_strong_descent(&tr, sigma);
        mons.push(monitor("strong_descent", r.holds, format!("worst margin {}", fmt_f64(r.worst_margin))));
    }
    let mut artifacts = vec![("trace.csv", optimize_csv(&tr))];
    if p.diagnose {
        let h_limit = match (p.splitting, e.critical_value) {
            (Splitting::Registry, Some(h)) => HLimit::Known(h),
            _ => HLimit::Last,
        };
        let fit = estimate_exponent(&tr.energies, &tr.grad_norms, &FitOptions { h_limit, ..FitOptions::default() });
        mons.push(monitor("rate_fit", fit.is_ok(), fit.as_ref().map(|f| format!("theta {}", fmt_f64(f.theta))).unwrap_or_else(|e| e.to_string())));
        let report = match fit {
            Ok(f) => serde_json::json!({
                "theta": f.theta, "theta_raw": f.theta_raw, "c": f.c, "c_lower": f.c_lower,
                "model": f.model.as_str(), "r2": f.fit_r2, "h_limit": f.h_limit,
                "tail_fraction": f.tail_fraction, "samples": f.samples,
            }),
            Err(e) => serde_json::json!({ "error": e.to_string() }),
        };
        artifacts.push(("rate_report.json", json(&report)));
    }
    Ok(Outcome { monitors: mons, artifacts })
}

fn optimize_csv(tr: &IterateTrace) -> Vec<u8> {
    let d = tr.states[0].len();
    let mut t = Table::with_vector(&["k", "energy", "grad_norm", "step_norm"], "u", d);
    for k in 0..tr.len() {
        let step = if k == 0 { 0.0 } else { tr.step_norms[k - 1] };
        let mut row = vec![tr.energies[k], tr.grad_norms[k], step];
        row.extend(&tr.states[k]);
        t.push_row(&[k as u64], &row);
    }
    t.to_bytes()
}

fn limit_monitor(last: &[f64], want: &Option<Vec<f64>>, tol: f64) -> Option<Monitor> {
    want.as_ref().map(|w| {
        let d = worst(last.iter().zip(w).map(|(a, b)| (a - b).abs()));
        monitor("limit", d <= tol, format!("sup distance {}", fmt_f64(d)))
    })
}

fn default_f0(p: &Option<Vec<f64>>, n: usize) -> Vec<f64> {
    p.clone().unwrap_or_else(|| vec![0.5; n])
}

fn lv_csv(tr: &LVTrace, every: usize, index: bool) -> Vec<u8> {
    let n = tr.states[0].len();
    let ent = tr.entropies.is_some();
    let mut fixed = vec![if index { "k" } else { "t" }, "energy", "min_f"];
    if ent {
        fixed.push("entropy");
    }
    let mut t = Table::with_vector(&fixed, "f", n);
    for k in sampled(tr.states.len(), every) {
        let mut row = Vec::new();
        if !index {
            row.push(tr.times[k]);
        }
        row.extend([tr.energies[k], tr.min_f[k]]);
        if let Some(e) = &tr.entropies {
            row.push(e[k]);
        }
        row.extend(&tr.states[k]);
        let idx = [k as u64];
        t.push_row(if index { &idx[..] } else { &[] }, &row);
    }
    t.to_bytes()
}

fn lv_continuous(p: &LvContinuousParams, seed: u64) -> Result<Outcome> {
    let sys = LVSystem::from_registry(&p.system, seed)?;
    let f0 = default_f0(&p.f0, sys.n());
    let tr = if p.sqrt {
        let u0: Vec<f64> = f0.iter().map(|f| f.sqrt()).collect();
        let mut tr = integrate_sqrt(&sys, &u0, p.dt, p.t_end)?;
        for s in tr.states.iter_mut() {
            s.iter_mut().for_each(|u| *u *= *u);
        }
        tr.min_f = tr.states.iter().map(|s| s.iter().copied().fold(f64::INFINITY, f64::min)).collect();
        tr
    } else {
        let ent = p.f_tilde.clone().map(|ft| EntropySpec::continuous(&sys, ft)).transpose()?;
        integrate_continuous(&sys, &f0, p.dt, p.t_end, ent.as_ref())?
    };
    let scale = tr.energies.iter().fold(1.0f64, |m, e| m.max(e.abs()));
    let mut mons = vec![
        monitor("positive", tr.all_positive(), format!("min f {}", fmt_f64(tr.min_f.iter().copied().fold(f64::INFINITY, f64::min)))),
        monitor("energy_nondecreasing", tr.energy_nondecreasing(1e-10 * scale), ""),
    ];
    mons.extend(limit_monitor(tr.last(), &p.expect_limit, p.limit_tol));
    if let Some(ft) = &p.f_tilde {
        let rep = entropy_trap_monitor(&sys, &tr, &EntropySpec::continuous(&sys, ft.clone())?)?;
        mons.push(monitor("entropy_trap", rep.trapped, format!("final F {}, violations {}", fmt_f64(*rep.f.last().unwrap()), rep.violations)));
    }
    Ok(Outcome { monitors: mons, artifacts: vec![("trace.csv", lv_csv(&tr, p.record_every, false))] })
}

fn lv_discrete(p: &LvDiscreteParams, seed: u64) -> Result<Outcome> {
    let sys = LVSystem::from_registry(&p.system, seed)?;
    let f0 = default_f0(&p.f0, sys.n());
    let a_inf = norm_inf(&sys.a);
    let mut mons = Vec::new();
    let tr = if p.scheme == "shahshahani" {
        let lambda = p.lambda.unwrap_or(spectral_radius(&sys.b)?);
        let d_inf = norm_inf(&sys.d);
        let bound = 1.0 / (d_inf * m_epsilon(&sys, lambda, 0.1 * a_inf)?);
        let tau = p.tau.unwrap_or(p.tau_fraction * bound);
        let ent = p.f_tilde.clone().map(|ft| EntropySpec::discrete(&sys, ft, lambda, tau)).transpose()?;
        let tr = iterate_shahshahani(&sys, lambda, tau, &f0, p.steps, ent.as_ref())?;
        let rep = check_discrete_properties(&sys, lambda, tau, p.eps.unwrap_or(0.1 * a_inf), &tr)?;
        mons.push(monitor("feasible", rep.feasible, format!("radius {}", fmt_f64(rep.radius))));
        mons.push(monitor("ratio_bound", rep.ratio_ok, format!("max ratio {} bound {}", fmt_f64(rep.max_ratio), fmt_f64(rep.ratio_bound))));
        mons.push(monitor("energy_monotone", rep.energy_monotone, ""));
        mons.push(monitor("l2_partial_sums", rep.l2_ok, format!("worst excess {}", fmt_f64(rep.l2_worst_excess))));
        if let Some(spec) = &ent {
            let t = entropy_trap_monitor(&sys, &tr, spec)?;
            mons.push(monitor("entropy_trap", t.trapped, format!("final F {}, violations {}", fmt_f64(*t.f.last().unwrap()), t.violations)));
        }
        tr
    } else {
        let split = build_splitting(&sys.b)?;
        let tau = p.tau.unwrap_or(1.0);
        let mut u: Vec<f64> = f0.iter().map(|f| f.sqrt()).collect();
        let mut tr = gradflow_lv_trace(&sys, &f0);
        let mut h = sqrt_energy(&sys, &u);
        let mut rise: f64 = 0.0;
        for k in 1..=p.steps {
            u = if p.scheme == "dca" { dca_lv_step(&split, &sys, &u)? } else { semi_implicit_lv_step(&split, &sys, tau, &u)? };
            let hn = sqrt_energy(&sys, &u);
            rise = rise.max((hn - h) / h.abs().max(1.0));
            h = hn;
            let f: Vec<f64> = u.iter().map(|v| v * v).collect();
            push_lv(&mut tr, &sys, k as f64, f);
        }
        mons.push(monitor("sqrt_energy_nonincreasing", rise <= 1e-12, format!("largest relative rise {}", fmt_f64(rise))));
        tr
    };
    mons.insert(0, monitor("positive", tr.all_positive(), ""));
    mons.extend(limit_monitor(tr.last(), &p.expect_limit, p.limit_tol));
    Ok(Outcome { monitors: mons, artifacts: vec![("trace.csv", lv_csv(&tr, p.record_every, true))] })
}

fn gradflow_lv_trace(sys: &LVSystem, f0: &[f64]) -> LVTrace {
    LVTrace {
        times: vec![0.0],
        states: vec![f0.to_vec()],
        energies: vec![energy_e(sys, f0)],
        entropies: None,
        min_f: vec![f0.iter().copied().fold(f64::INFINITY, f64::min)],
        ratio: Vec::new(),
    }
}

fn push_lv(tr: &mut LVTrace, sys: &LVSystem, t: f64, f: Vec<f64>) {
    let prev = tr.states.last().unwrap();
    tr.ratio.push(worst(f.iter().zip(prev).map(|(a, b)| (a / b - 1.0).abs())));
    tr.min_f.push(f.iter().copied().fold(f64::INFINITY, f64::min));
    tr.energies.push(energy_e(sys, &f));
    tr.times.push(t);
    tr.states.push(f);
}

fn lv_mutation(p: &LvMutationParams) -> Result<Outcome> {
    let (coupling, width) = (p.coupling, p.width);
    let growth = p.growth;
    let g = MutationGrid::new(
        p.n,
        move |_| growth,
        move |x, y| match width {
            Some(w) => coupling * (-(x - y).powi(2) / (2.0 * w * w)).exp(),
            None => coupling,
        },
        p.diffusion,
    )?;
    let mut u: Vec<f64> = g.x.iter().map(|x| p.u0 + p.amplitude * (std::f64::consts::PI * x).cos()).collect();
    let mut t = Table::new(["k", "t", "energy", "u_min", "u_max"]);
    let row = |t: &mut Table, k: usize, u: &[f64], e: f64| {
        let lo = u.iter().copied().fold(f64::INFINITY, f64::min);
        t.push_row(&[k as u64], &[k as f64 * p.dt, e, lo, norm_inf(u)]);
    };
    let mut e = g.energy(&u);
    row(&mut t, 0, &u, e);
    let (mut checked, mut violations) = (0usize, 0usize);
    for k in 1..=p.steps {
        let (next, info) = g.step(p.dt, &u)?;
        let en = g.energy(&next);
        if p.dt < info.dt_threshold {
            checked += 1;
            if en > e + 1e-12 * e.abs().max(1.0) {
                violations += 1;
            }
        }
        u = next;
        e = en;
        if k % p.record_every == 0 || k == p.steps {
            row(&mut t, k, &u, e);
        }
    }
    let mut mons = vec![monitor("energy_nonincreasing", violations == 0, format!("{violations} increases over {checked} checked steps"))];
    if let Some(want) = p.expect_limit {
        let d = worst(u.iter().map(|v| (v - want).abs()));
        mons.push(monitor("limit", d <= p.limit_tol, format!("sup distance {}", fmt_f64(d))));
    }
    let mut prof = Table::new(["x", "u"]);
    for (x, v) in g.x.iter().zip(&u) {
        prof.push_row(&[], &[*x, *v]);
    }
    Ok(Outcome { monitors: mons, artifacts: vec![("trace.csv", t.to_bytes()), ("profile.csv", prof.to_bytes())] })
}

fn kernel_for(spec: &str, l: f64, n: usize, tol: f64) -> Result<PeriodizedKernel> {
    Ok(periodize(KernelSpec::parse(spec)?, TorusGrid::new(l, n)?, tol)?)
}

fn functionals_csv(tr: &CDTrace) -> Vec<u8> {
    let mut t = Table::new([
        "t", "dt", "e", "alpha", "f", "c", "lp1_norm", "u_min", "u_max", "ux_max", "uxx_max", "uxxx_max", "residual",
        "reg_residual", "du_norm",
    ]);
    for r in &tr.records {
        t.push_row(
            &[],
            &[
                r.t, r.dt, r.e, r.alpha, r.f, r.c, r.lp1_norm, r.u_min, r.u_max, r.ux_max, r.uxx_max, r.uxxx_max, r.residual,
                r.reg_residual, r.du_norm,
            ],
        );
    }
    t.to_bytes()
}

fn profile_csv(grid: &TorusGrid, u: &[f64]) -> Vec<u8> {
    let mut t = Table::new(["x", "u"]);
    for (x, v) in grid.nodes().iter().zip(u) {
        t.push_row(&[], &[*x, *v]);
    }
    t.to_bytes()
}

fn cd(p: &CdParams) -> Result<Outcome> {
    let k = kernel_for(&p.kernel, p.l, p.n, p.kernel_tol)?;
    let s = seed_initial(k.grid, p.p, p.delta, p.normalize_seed)?;
    let opts = EvolveOptions {
        dt: p.dt,
        t_end: p.t_end,
        stepper: Stepper::parse(&p.stepper)?,
        frame_every: p.frame_every,
        convergence: p.convergence_tol.map(|tol| ConvergenceRule { tol, sustain: p.sustain, stop: true }),
        ..EvolveOptions::default()
    };
    let tr = evolve(&s.u, &k, p.p, &opts)?;
    let mut mons = Vec::new();
    if p.functional_monitors {
        let m = functional_monitors(&tr, p.f_slack, p.lp1_tol, p.e_rel_tol);
        mons.push(monitor("f_nondecreasing", m.f_nondecreasing, format!("worst drop {}", fmt_f64(m.f_worst_drop))));
        mons.push(monitor("lp1_monotone", m.lp1_monotone, ""));
        mons.push(monitor("lp1_to_one", m.lp1_to_one, format!("final error {}", fmt_f64(m.lp1_final_error))));
        mons.push(monitor("e_converges", m.e_converges, ""));
        if let Some(b) = m.e_nondecreasing {
            mons.push(monitor("e_nondecreasing", b, ""));
        }
        mons.push(monitor("manifold_attraction", m.manifold_attraction, ""));
    }
    if p.bell {
        let frames_ok = tr.frames.iter().all(|f| is_bell_shaped(&f.u, 1e-10));
        let ok = frames_ok && is_bell_shaped(&tr.final_u, 1e-10);
        mons.push(monitor("bell_shaped", ok, format!("{} frames", tr.frames.len())));
    }
    if let Some(eps) = p.bounds_eps {
        let b = pointwise_bounds(&tr, &k, eps);
        mons.push(monitor("pointwise_bounds", b.holds(), format!("lower violations {}", b.lower_violations)));
    }
    if p.expect_converged {
        mons.push(monitor("converged", tr.converged_at.is_some(), format!("t {}", fmt_f64(tr.last().t))));
    }
    Ok(Outcome {
        monitors: mons,
        artifacts: vec![("functionals.csv", functionals_csv(&tr)), ("profile.csv", profile_csv(&k.grid, &tr.final_u))],
    })
}

fn regcd(p: &RegcdParams) -> Result<Outcome> {
    let k = kernel_for(&p.kernel, p.l, p.n, p.kernel_tol)?;
    let s = seed_initial(k.grid, p.p, p.delta, p.normalize_seed)?;
    let cfg = RegCDConfig::new(p.epsilon, k.grid, p.p, p.cfl_safety)?;
    let rule = ConvergenceRule { tol: p.convergence_tol, sustain: p.sustain, stop: true };
    let run = reg_evolve(&s.u, &k, &cfg, p.dt, p.t_end, Some(rule), p.frame_every)?;
    let tr = &run.trace;
    let drop = worst(tr.records.windows(2).map(|w| w[0].f - w[1].f));
    let res = reg_residual(&tr.final_u, &k, p.p, p.epsilon);
    let mut mons = vec![
        monitor("energy_positive", !run.energy_warning, ""),
        monitor("converged", tr.converged_at.is_some(), format!("t {}", fmt_f64(tr.last().t))),
        monitor("f_nondecreasing", drop <= p.f_slack, format!("worst drop {}", fmt_f64(drop))),
        monitor("reg_residual", res < p.residual_tol, fmt_f64(res)),
        monitor("positive", tr.final_u.iter().all(|v| *v > 0.0), ""),
    ];
    if let Some(frac) = p.expect_nonconstant {
        let ubar = constant_equilibrium(p.l, p.p);
        let dev = worst(tr.final_u.iter().map(|v| (v - ubar).abs()));
        mons.push(monitor("nonconstant", dev > frac * ubar, format!("sup deviation {}", fmt_f64(dev))));
    }
    let mut artifacts = vec![("functionals.csv", functionals_csv(tr)), ("profile.csv", profile_csv(&k.grid, &tr.final_u))];
    if p.decay {
        let fit = limit_decay(tr, 0.5);
        let (pass, detail) = match &fit {
            Ok(f) => (f.r2 > 0.95, format!("{} r2 {}", f.model.as_str(), fmt_f64(f.r2))),
            Err(e) => (false, e.to_string()),
        };
        mons.push(monitor("decay_fit", pass, detail));
        let report = match fit {
            Ok(f) => serde_json::json!({
                "model": f.model.as_str(), "rate": f.rate, "r2": f.r2, "r2_exp": f.r2_exp,
                "r2_alg": f.r2_alg, "samples": f.samples,
            }),
            Err(e) => serde_json::json!({ "error": e.to_string() }),
        };
        artifacts.push(("rate_report.json", json(&report)));
    }
    Ok(Outcome { monitors: mons, artifacts })
}

fn petviashvili_run(p: &PetviashviliParams) -> Result<Outcome> {
    let k = kernel_for(&p.kernel, p.l, p.n, p.kernel_tol)?;
    let xs = k.grid.nodes();
    let u0: Vec<f64> = xs.iter().map(|x| p.init_amplitude * (-(x / p.init_width).powi(2)).exp()).collect();
    let opts = PetviashviliOptions { gamma: p.gamma, tol: p.tol, max_iter: p.max_iter };
    let mut hist = Table::new(["iter", "change", "m"]);
    let run = match petviashvili(&u0, &k, p.p, &opts) {
        Ok(r) => r,
        Err(gradflow::Error::Diverged(msg)) => {
            let mons = vec![monitor("diverged", p.expect_diverge, msg)];
            return Ok(Outcome { monitors: mons, artifacts: vec![("history.csv", hist.to_bytes()), ("profile.csv", profile_csv(&k.grid, &u0))] });
        }
        Err(e) => return Err(e.into()),
    };
    for (i, (c, m)) in run.changes.iter().zip(&run.m_history).enumerate() {
        hist.push_row(&[i as u64 + 1], &[*c, *m]);
    }
    let mut mons = Vec::new();
    if p.expect_diverge {
        mons.push(monitor("diverged", false, format!("converged={} after {} iterations", run.converged, run.iterations)));
    } else {
        mons.push(monitor("converged", run.converged, format!("{} iterations", run.iterations)));
    }
    if let Some([a, w]) = p.reference_sech2 {
        let r: Vec<f64> = xs.iter().map(|x| a / (x / w).cosh().powi(2)).collect();
        let (al, _) = align(&k.grid, &run.u, &r);
        let err = worst(al.iter().zip(&r).map(|(x, y)| (x - y).abs()));
        mons.push(monitor("reference", err < p.reference_tol, format!("sup error {}", fmt_f64(err))));
    }
    Ok(Outcome { monitors: mons, artifacts: vec![("history.csv", hist.to_bytes()), ("profile.csv", profile_csv(&k.grid, &run.u))] })
}

fn diagnose_run(p: &DiagnoseParams) -> Result<Outcome> {
    let tr = read_trace(&p.trace)?;
    let rep = diagnose_trace(&tr, &fit_options(p.h_limit, &p.h_estimate, p.tail_fraction))?;
    let mut mons = vec![monitor("rate_fit", true, format!("theta {}", fmt_f64(rep.theta)))];
    if let Some(want) = p.expect_theta {
        mons.push(monitor("theta", (rep.theta - want).abs() <= p.theta_tol, format!("theta {} vs {}", fmt_f64(rep.theta), fmt_f64(want))));
    }
    Ok(Outcome { monitors: mons, artifacts: vec![("rate_report.json", json(&rep))] })
}

fn execute(s: &Scenario, out: &Path) -> ScenarioResult {
    let written = run_scenario(s).and_then(|o| {
        let dir = out.join(&s.id);
        std::fs::create_dir_all(&dir).map_err(|e| HarnessError::io(&dir, e))?;
        for (name, bytes) in &o.artifacts {
            let path = dir.join(name);
            std::fs::write(&path, bytes).map_err(|e| HarnessError::io(&path, e))?;
        }
        Ok(o.monitors)
    });
    let (status, error, monitors) = match written {
        Ok(m) if m.iter().all(|m| m.pass) => ("pass", None, m),
        Ok(m) => ("fail", None, m),
        Err(e) => ("error", Some(e.to_string()), Vec::new()),
    };
    ScenarioResult {
        id: s.id.clone(),
        kind: s.kind.as_str(),
        seed: s.seed,
        status,
        error,
        monitors,
        outputs: s.outputs.clone(),
    }
}

/// Run every scenario on a pool of `jobs` workers, write artifacts under `out`
/// and `out/summary.json`. Results are ordered by scenario id.
pub fn run_all(scenarios: &[Scenario], jobs: usize, out: &Path) -> Result<Summary> {
    std::fs::create_dir_all(out).map_err(|e| HarnessError::io(out, e))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| HarnessError::io(out, std::io::Error::other(e.to_string())))?;
    let mut results: Vec<ScenarioResult> = pool.install(|| scenarios.par_iter().map(|s| execute(s, out)).collect());
    results.sort_by(|a, b| a.id.cmp(&b.id));
    let summary = Summary { all_pass: results.iter().all(|r| r.passed()), scenarios: results };
    let path = out.join("summary.json");
    std::fs::write(&path, json(&summary)).map_err(|e| HarnessError::io(&path, e))?;
    Ok(summary)
}
