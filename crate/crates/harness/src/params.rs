//! Per-kind scenario parameters. Every struct rejects unknown keys.

use std::path::PathBuf;

use gradflow::dc::energies::lookup;
use gradflow::dc::Scheme;
use gradflow::lv::LVSystem;
use gradflow::torus::{KernelSpec, TorusGrid};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

fn d_true() -> bool {
    true
}
fn d_two() -> usize {
    2
}
fn d_p() -> f64 {
    2.0
}
fn d_one() -> f64 {
    1.0
}
fn d_iters() -> usize {
    1000
}
fn d_grad_tol() -> f64 {
    1e-10
}
fn d_step_tol() -> f64 {
    1e-15
}
fn d_slack() -> f64 {
    1e-10
}
fn d_limit_tol() -> f64 {
    1e-8
}
fn d_dt_lv() -> f64 {
    0.01
}
fn d_t_end_lv() -> f64 {
    50.0
}
fn d_record() -> usize {
    1
}
fn d_shahshahani() -> String {
    "shahshahani".into()
}
fn d_tau_fraction() -> f64 {
    0.5
}
fn d_mut_n() -> usize {
    64
}
fn d_diffusion() -> f64 {
    0.1
}
fn d_mut_u0() -> f64 {
    0.5
}
fn d_amplitude() -> f64 {
    0.2
}
fn d_delta() -> f64 {
    0.05
}
fn d_dt_cd() -> f64 {
    0.1
}
fn d_t_end_cd() -> f64 {
    100.0
}
fn d_rk4() -> String {
    "rk4".into()
}
fn d_sustain() -> usize {
    100
}
fn d_f_slack() -> f64 {
    1e-10
}
fn d_lp1_tol() -> f64 {
    1e-6
}
fn d_kernel_tol() -> f64 {
    1e-15
}
fn d_cfl() -> f64 {
    0.25
}
fn d_reg_t_end() -> f64 {
    400.0
}
fn d_conv_tol() -> f64 {
    1e-9
}
fn d_frame_every() -> usize {
    10
}
fn d_reg_f_slack() -> f64 {
    1e-9
}
fn d_residual_tol() -> f64 {
    1e-7
}
fn d_gamma() -> f64 {
    2.0
}
fn d_pv_tol() -> f64 {
    1e-13
}
fn d_pv_iter() -> usize {
    5000
}
fn d_pv_ref_tol() -> f64 {
    1e-6
}
fn d_tail() -> f64 {
    0.5
}
fn d_theta_tol() -> f64 {
    0.05
}
fn d_last() -> String {
    "last".into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Splitting {
    /// The splitting shipped with the registry energy.
    #[default]
    Registry,
    /// Heavy-ball splitting of the registry energy with step `tau`.
    Polyak,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeParams {
    pub energy: String,
    #[serde(default = "d_two")]
    pub dim: usize,
    /// `dca`, `semi_implicit`, `momentum`/`polyak`, `dual`, `dual_momentum`/`nesterov`.
    #[serde(default = "d_dca")]
    pub scheme: String,
    #[serde(default)]
    pub splitting: Splitting,
    #[serde(default = "d_one")]
    pub tau: f64,
    /// Curvature bound of the energy, required for the Polyak splitting.
    pub lip: Option<f64>,
    pub beta: Option<f64>,
    /// `β = beta_fraction·(κ + μ)/2`.
    pub beta_fraction: Option<f64>,
    pub u0: Option<Vec<f64>>,
    #[serde(default = "d_iters")]
    pub max_iters: usize,
    #[serde(default = "d_grad_tol")]
    pub grad_tol: f64,
    #[serde(default = "d_step_tol")]
    pub step_tol: f64,
    #[serde(default = "d_slack")]
    pub descent_slack: f64,
    pub sigma: Option<f64>,
    #[serde(default)]
    pub expect_converged: bool,
    #[serde(default)]
    pub diagnose: bool,
}

fn d_dca() -> String {
    "dca".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LvContinuousParams {
    pub system: String,
    pub f0: Option<Vec<f64>>,
    #[serde(default = "d_dt_lv")]
    pub dt: f64,
    #[serde(default = "d_t_end_lv")]
    pub t_end: f64,
    /// Integrate the square-root system instead.
    #[serde(default)]
    pub sqrt: bool,
    pub expect_limit: Option<Vec<f64>>,
    #[serde(default = "d_limit_tol")]
    pub limit_tol: f64,
    #[serde(default = "d_record")]
    pub record_every: usize,
    /// Candidate limit for the entropy monitor.
    pub f_tilde: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LvDiscreteParams {
    pub system: String,
    /// `shahshahani`, `dca` or `semi_implicit`.
    #[serde(default = "d_shahshahani")]
    pub scheme: String,
    pub f0: Option<Vec<f64>>,
    #[serde(default = "d_iters")]
    pub steps: usize,
    pub tau: Option<f64>,
    /// Shahshahani step as a fraction of the admissible bound, when `tau` is absent.
    #[serde(default = "d_tau_fraction")]
    pub tau_fraction: f64,
    pub lambda: Option<f64>,
    pub eps: Option<f64>,
    pub expect_limit: Option<Vec<f64>>,
    #[serde(default = "d_limit_tol")]
    pub limit_tol: f64,
    #[serde(default = "d_record")]
    pub record_every: usize,
    pub f_tilde: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LvMutationParams {
    #[serde(default = "d_mut_n")]
    pub n: usize,
    #[serde(default = "d_diffusion")]
    pub diffusion: f64,
    #[serde(default = "d_dt_lv")]
    pub dt: f64,
    #[serde(default = "d_iters")]
    pub steps: usize,
    #[serde(default = "d_one")]
    pub growth: f64,
    #[serde(default = "d_one")]
    pub coupling: f64,
    /// Gaussian coupling width; constant coupling when absent.
    pub width: Option<f64>,
    #[serde(default = "d_mut_u0")]
    pub u0: f64,
    #[serde(default = "d_amplitude")]
    pub amplitude: f64,
    pub expect_limit: Option<f64>,
    #[serde(default = "d_lp1_tol")]
    pub limit_tol: f64,
    #[serde(default = "d_record")]
    pub record_every: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CdParams {
    pub kernel: String,
    pub l: f64,
    pub n: usize,
    #[serde(default = "d_p")]
    pub p: f64,
    #[serde(default = "d_delta")]
    pub delta: f64,
    #[serde(default)]
    pub normalize_seed: bool,
    #[serde(default = "d_dt_cd")]
    pub dt: f64,
    #[serde(default = "d_t_end_cd")]
    pub t_end: f64,
    #[serde(default = "d_rk4")]
    pub stepper: String,
    /// Stop once `‖u'‖ < convergence_tol` for `sustain` steps.
    pub convergence_tol: Option<f64>,
    #[serde(default = "d_sustain")]
    pub sustain: usize,
    #[serde(default)]
    pub frame_every: usize,
    #[serde(default = "d_true")]
    pub functional_monitors: bool,
    #[serde(default = "d_f_slack")]
    pub f_slack: f64,
    #[serde(default = "d_lp1_tol")]
    pub lp1_tol: f64,
    #[serde(default = "d_lp1_tol")]
    pub e_rel_tol: f64,
    #[serde(default = "d_true")]
    pub bell: bool,
    pub bounds_eps: Option<f64>,
    #[serde(default)]
    pub expect_converged: bool,
    #[serde(default = "d_kernel_tol")]
    pub kernel_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegcdParams {
    pub kernel: String,
    pub l: f64,
    pub n: usize,
    #[serde(default = "d_p")]
    pub p: f64,
    pub epsilon: f64,
    #[serde(default = "d_delta")]
    pub delta: f64,
    #[serde(default = "d_true")]
    pub normalize_seed: bool,
    #[serde(default = "d_dt_cd")]
    pub dt: f64,
    #[serde(default = "d_reg_t_end")]
    pub t_end: f64,
    #[serde(default = "d_cfl")]
    pub cfl_safety: f64,
    #[serde(default = "d_conv_tol")]
    pub convergence_tol: f64,
    #[serde(default = "d_sustain")]
    pub sustain: usize,
    #[serde(default = "d_frame_every")]
    pub frame_every: usize,
    #[serde(default = "d_reg_f_slack")]
    pub f_slack: f64,
    #[serde(default = "d_residual_tol")]
    pub residual_tol: f64,
    /// Require `‖u − ū‖∞ > fraction·ū` at the limit.
    pub expect_nonconstant: Option<f64>,
    /// Classify the decay of `‖u(t) − u_limit‖`.
    #[serde(default)]
    pub decay: bool,
    #[serde(default = "d_kernel_tol")]
    pub kernel_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PetviashviliParams {
    pub kernel: String,
    pub l: f64,
    pub n: usize,
    #[serde(default = "d_p")]
    pub p: f64,
    #[serde(default = "d_gamma")]
    pub gamma: f64,
    #[serde(default = "d_pv_tol")]
    pub tol: f64,
    #[serde(default = "d_pv_iter")]
    pub max_iter: usize,
    /// Initial guess `amplitude·exp(−(x/width)²)`.
    #[serde(default = "d_one")]
    pub init_amplitude: f64,
    #[serde(default = "d_p")]
    pub init_width: f64,
    #[serde(default)]
    pub expect_diverge: bool,
    /// `[A, w]`: compare against `A·sech²(x/w)` after alignment.
    pub reference_sech2: Option<[f64; 2]>,
    #[serde(default = "d_pv_ref_tol")]
    pub reference_tol: f64,
    #[serde(default = "d_kernel_tol")]
    pub kernel_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnoseParams {
    /// Trace CSV, relative to the config file.
    pub trace: PathBuf,
    /// Known critical value; otherwise estimated by `h_estimate`.
    pub h_limit: Option<f64>,
    /// `last` or `aitken`.
    #[serde(default = "d_last")]
    pub h_estimate: String,
    #[serde(default = "d_tail")]
    pub tail_fraction: f64,
    pub expect_theta: Option<f64>,
    #[serde(default = "d_theta_tol")]
    pub theta_tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Params {
    Optimize(OptimizeParams),
    LvContinuous(LvContinuousParams),
    LvDiscrete(LvDiscreteParams),
    LvMutation(LvMutationParams),
    Cd(CdParams),
    Regcd(RegcdParams),
    Petviashvili(PetviashviliParams),
    Diagnose(DiagnoseParams),
}

struct Check<'a> {
    id: &'a str,
}

impl Check<'_> {
    fn fail(&self, field: &str, msg: impl Into<String>) -> HarnessError {
        HarnessError::validation(self.id, field, msg)
    }

    fn positive(&self, field: &str, v: f64) -> Result<()> {
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(self.fail(field, format!("must be positive and finite, got {v}")))
        }
    }

    fn nonneg(&self, field: &str, v: f64) -> Result<()> {
        if v >= 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(self.fail(field, format!("must be nonnegative and finite, got {v}")))
        }
    }

    fn at_least(&self, field: &str, v: usize, min: usize) -> Result<()> {
        if v >= min {
            Ok(())
        } else {
            Err(self.fail(field, format!("must be at least {min}, got {v}")))
        }
    }

    fn fraction(&self, field: &str, v: f64) -> Result<()> {
        if v > 0.0 && v <= 1.0 {
            Ok(())
        } else {
            Err(self.fail(field, format!("must lie in (0, 1], got {v}")))
        }
    }

    fn vector(&self, field: &str, v: &[f64], len: usize, positive: bool) -> Result<()> {
        if v.len() != len {
            return Err(self.fail(field, format!("expected {len} entries, got {}", v.len())));
        }
        if v.iter().any(|x| !x.is_finite() || (positive && !(*x > 0.0))) {
            let what = if positive { "positive" } else { "finite" };
            return Err(self.fail(field, format!("entries must be {what}")));
        }
        Ok(())
    }

    fn kernel(&self, field: &str, spec: &str) -> Result<KernelSpec> {
        KernelSpec::parse(spec).map_err(|e| self.fail(field, e.to_string()))
    }

    fn grid(&self, l: f64, n: usize) -> Result<TorusGrid> {
        self.positive("l", l)?;
        TorusGrid::new(l, n).map_err(|e| self.fail("n", e.to_string()))
    }

    fn system(&self, name: &str, seed: u64) -> Result<LVSystem> {
        LVSystem::from_registry(name, seed).map_err(|e| self.fail("system", e.to_string()))
    }
}

impl Params {
    pub fn from_table(kind: crate::config::Kind, id: &str, table: toml::Table) -> Result<Self> {
        use crate::config::Kind;
        fn de<T: serde::de::DeserializeOwned>(id: &str, table: toml::Table) -> Result<T> {
            toml::Value::Table(table).try_into::<T>().map_err(|e| {
                let msg = e.message().to_string();
                let field = crate::error::quoted_key(&msg).unwrap_or_else(|| "params".into());
                HarnessError::validation(id, &format!("params.{field}"), msg)
            })
        }
        Ok(match kind {
            Kind::Optimize => Params::Optimize(de(id, table)?),
            Kind::LvContinuous => Params::LvContinuous(de(id, table)?),
            Kind::LvDiscrete => Params::LvDiscrete(de(id, table)?),
            Kind::LvMutation => Params::LvMutation(de(id, table)?),
            Kind::Cd => Params::Cd(de(id, table)?),
            Kind::Regcd => Params::Regcd(de(id, table)?),
            Kind::Petviashvili => Params::Petviashvili(de(id, table)?),
            Kind::Diagnose => Params::Diagnose(de(id, table)?),
        })
    }

    /// Semantic checks, including registry resolution.
    pub fn validate(&self, id: &str, seed: u64) -> Result<()> {
        let c = Check { id };
        match self {
            Params::Optimize(p) => {
                let e = lookup(&p.energy, p.dim).map_err(|e| c.fail("energy", e.to_string()))?;
                let scheme = Scheme::parse(&p.scheme).ok_or_else(|| c.fail("scheme", format!("unknown scheme `{}`", p.scheme)))?;
                c.positive("tau", p.tau)?;
                c.at_least("max_iters", p.max_iters, 1)?;
                c.positive("grad_tol", p.grad_tol)?;
                c.positive("step_tol", p.step_tol)?;
                c.nonneg("descent_slack", p.descent_slack)?;
                if let Some(u0) = &p.u0 {
                    c.vector("u0", u0, p.dim, false)?;
                }
                if p.splitting == Splitting::Polyak {
                    let lip = p.lip.ok_or_else(|| c.fail("lip", "required by the polyak splitting"))?;
                    c.positive("lip", lip)?;
                    if p.tau * lip >= 1.0 {
                        return Err(c.fail("tau", format!("polyak splitting needs tau·lip < 1, got {}", p.tau * lip)));
                    }
                }
                let momentum = matches!(scheme, Scheme::Momentum | Scheme::DualMomentum);
                match (p.beta, p.beta_fraction) {
                    (Some(_), Some(_)) => return Err(c.fail("beta", "give beta or beta_fraction, not both")),
                    (Some(b), None) => c.nonneg("beta", b)?,
                    (None, Some(f)) => c.nonneg("beta_fraction", f)?,
                    (None, None) if momentum => return Err(c.fail("beta", "momentum schemes need beta or beta_fraction")),
                    _ => {}
                }
                if matches!(scheme, Scheme::Dual | Scheme::DualMomentum)
                    && p.splitting == Splitting::Registry
                    && e.split.inv_grad_hplus.is_none()
                {
                    return Err(c.fail("scheme", format!("`{}` has no inverse gradient for the dual schemes", p.energy)));
                }
                if let Some(s) = p.sigma {
                    c.positive("sigma", s)?;
                }
            }
            Params::LvContinuous(p) => {
                let sys = c.system(&p.system, seed)?;
                if let Some(f0) = &p.f0 {
                    c.vector("f0", f0, sys.n(), true)?;
                }
                c.positive("dt", p.dt)?;
                c.nonneg("t_end", p.t_end)?;
                c.positive("limit_tol", p.limit_tol)?;
                c.at_least("record_every", p.record_every, 1)?;
                if let Some(v) = &p.expect_limit {
                    c.vector("expect_limit", v, sys.n(), false)?;
                }
                if let Some(v) = &p.f_tilde {
                    c.vector("f_tilde", v, sys.n(), false)?;
                    c.nonneg("f_tilde", v.iter().copied().fold(f64::INFINITY, f64::min))?;
                }
            }
            Params::LvDiscrete(p) => {
                let sys = c.system(&p.system, seed)?;
                if !matches!(p.scheme.as_str(), "shahshahani" | "dca" | "semi_implicit") {
                    return Err(c.fail("scheme", format!("unknown scheme `{}`", p.scheme)));
                }
                if let Some(f0) = &p.f0 {
                    c.vector("f0", f0, sys.n(), true)?;
                }
                c.at_least("steps", p.steps, 1)?;
                c.at_least("record_every", p.record_every, 1)?;
                if let Some(t) = p.tau {
                    c.positive("tau", t)?;
                }
                c.fraction("tau_fraction", p.tau_fraction)?;
                if let Some(l) = p.lambda {
                    c.positive("lambda", l)?;
                }
                if let Some(e) = p.eps {
                    c.positive("eps", e)?;
                }
                c.positive("limit_tol", p.limit_tol)?;
                if let Some(v) = &p.expect_limit {
                    c.vector("expect_limit", v, sys.n(), false)?;
                }
                if let Some(v) = &p.f_tilde {
                    c.vector("f_tilde", v, sys.n(), false)?;
                    c.nonneg("f_tilde", v.iter().copied().fold(f64::INFINITY, f64::min))?;
                    if p.scheme != "shahshahani" {
                        return Err(c.fail("f_tilde", "the entropy monitor runs on the shahshahani scheme only"));
                    }
                }
            }
            Params::LvMutation(p) => {
                c.at_least("n", p.n, 2)?;
                c.nonneg("diffusion", p.diffusion)?;
                c.positive("dt", p.dt)?;
                c.at_least("steps", p.steps, 1)?;
                c.at_least("record_every", p.record_every, 1)?;
                c.positive("growth", p.growth)?;
                c.positive("coupling", p.coupling)?;
                if let Some(w) = p.width {
                    c.positive("width", w)?;
                }
                c.positive("u0", p.u0)?;
                if !(p.amplitude.abs() < p.u0) {
                    return Err(c.fail("amplitude", "must be smaller than u0 in magnitude"));
                }
                c.positive("limit_tol", p.limit_tol)?;
            }
            Params::Cd(p) => {
                c.kernel("kernel", &p.kernel)?;
                c.grid(p.l, p.n)?;
                if !(p.p > 1.0) {
                    return Err(c.fail("p", format!("must exceed 1, got {}", p.p)));
                }
                c.nonneg("delta", p.delta)?;
                c.positive("dt", p.dt)?;
                c.nonneg("t_end", p.t_end)?;
                gradflow::cd::Stepper::parse(&p.stepper).map_err(|e| c.fail("stepper", e.to_string()))?;
                if let Some(t) = p.convergence_tol {
                    c.positive("convergence_tol", t)?;
                }
                c.at_least("sustain", p.sustain, 1)?;
                c.nonneg("f_slack", p.f_slack)?;
                c.positive("lp1_tol", p.lp1_tol)?;
                c.positive("e_rel_tol", p.e_rel_tol)?;
                if let Some(e) = p.bounds_eps {
                    c.fraction("bounds_eps", e)?;
                }
                if p.expect_converged && p.convergence_tol.is_none() {
                    return Err(c.fail("expect_converged", "needs convergence_tol"));
                }
                c.positive("kernel_tol", p.kernel_tol)?;
            }
            Params::Regcd(p) => {
                c.kernel("kernel", &p.kernel)?;
                c.grid(p.l, p.n)?;
                if !(p.p > 1.0) {
                    return Err(c.fail("p", format!("must exceed 1, got {}", p.p)));
                }
                c.positive("epsilon", p.epsilon)?;
                c.nonneg("delta", p.delta)?;
                c.positive("dt", p.dt)?;
                c.nonneg("t_end", p.t_end)?;
                c.fraction("cfl_safety", p.cfl_safety)?;
                c.positive("convergence_tol", p.convergence_tol)?;
                c.at_least("sustain", p.sustain, 1)?;
                c.nonneg("f_slack", p.f_slack)?;
                c.positive("residual_tol", p.residual_tol)?;
                if let Some(f) = p.expect_nonconstant {
                    c.positive("expect_nonconstant", f)?;
                }
                if p.decay && p.frame_every == 0 {
                    return Err(c.fail("frame_every", "decay classification needs stored frames"));
                }
                c.positive("kernel_tol", p.kernel_tol)?;
            }
            Params::Petviashvili(p) => {
                c.kernel("kernel", &p.kernel)?;
                c.grid(p.l, p.n)?;
                if !(p.p > 1.0) {
                    return Err(c.fail("p", format!("must exceed 1, got {}", p.p)));
                }
                c.nonneg("gamma", p.gamma)?;
                c.positive("tol", p.tol)?;
                c.at_least("max_iter", p.max_iter, 1)?;
                c.positive("init_amplitude", p.init_amplitude)?;
                c.positive("init_width", p.init_width)?;
                if let Some([a, w]) = p.reference_sech2 {
                    c.positive("reference_sech2", a)?;
                    c.positive("reference_sech2", w)?;
                }
                c.positive("reference_tol", p.reference_tol)?;
                c.positive("kernel_tol", p.kernel_tol)?;
            }
            Params::Diagnose(p) => {
                if !matches!(p.h_estimate.as_str(), "last" | "aitken") {
                    return Err(c.fail("h_estimate", format!("expected `last` or `aitken`, got `{}`", p.h_estimate)));
                }
                if let Some(h) = p.h_limit {
                    if !h.is_finite() {
                        return Err(c.fail("h_limit", "must be finite"));
                    }
                }
                c.fraction("tail_fraction", p.tail_fraction)?;
                c.positive("theta_tol", p.theta_tol)?;
            }
        }
        Ok(())
    }

    /// Artifact file names written by this scenario.
    pub fn artifacts(&self) -> Vec<&'static str> {
        match self {
            Params::Optimize(p) if p.diagnose => vec!["trace.csv", "rate_report.json"],
            Params::Optimize(_) | Params::LvContinuous(_) | Params::LvDiscrete(_) => vec!["trace.csv"],
            Params::LvMutation(_) => vec!["trace.csv", "profile.csv"],
            Params::Cd(_) => vec!["functionals.csv", "profile.csv"],
            Params::Regcd(p) if p.decay => vec!["functionals.csv", "profile.csv", "rate_report.json"],
            Params::Regcd(_) => vec!["functionals.csv", "profile.csv"],
            Params::Petviashvili(_) => vec!["history.csv", "profile.csv"],
            Params::Diagnose(_) => vec!["rate_report.json"],
        }
    }
}
