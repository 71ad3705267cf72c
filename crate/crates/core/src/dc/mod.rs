//! Difference-of-convex schemes: DCA, semi-implicit Euler, DCA with momentum and
//! the dual DCA, plus descent-condition diagnostics and a test-energy registry.

mod descent;
pub mod energies;
mod flow;
mod solve;
mod spiral;
mod steps;

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{dot, norm, sub};

pub use descent::{check_strong_descent, momentum_surrogate, DescentReport};
pub use flow::{gradient_flow, FlowTrace};
pub use solve::solve_shifted;
pub use spiral::{check_nonconvergence_example, nonanalytic_log_ratio, spiral_energy, spiral_gradient, PolarSample};
pub use steps::{dca_step, dual_dca_step, dual_momentum_step, momentum_step, run, semi_implicit_step, Scheme};

pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type VecFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
pub type MatFn = Arc<dyn Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync>;

/// An energy `H = H₊ − H₋` with both parts convex.
///
/// `kappa` is the strong-convexity modulus of `H₊`, `mu` that of `H₋`, and
/// `lip_l` a Lipschitz constant of `∇H₊`. The constants are declared by the
/// caller; [`SplitEnergy::validate`] spot-checks them.
#[derive(Clone)]
pub struct SplitEnergy {
    pub dim: usize,
    pub eval_h: ScalarFn,
    pub eval_hplus: ScalarFn,
    pub eval_hminus: ScalarFn,
    pub grad_hplus: VecFn,
    pub grad_hminus: VecFn,
    pub hess_hplus: Option<MatFn>,
    pub inv_grad_hplus: Option<VecFn>,
    pub inv_grad_hminus: Option<VecFn>,
    pub kappa: f64,
    pub mu: f64,
    pub lip_l: f64,
}

impl std::fmt::Debug for SplitEnergy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SplitEnergy")
            .field("dim", &self.dim)
            .field("kappa", &self.kappa)
            .field("mu", &self.mu)
            .field("lip_l", &self.lip_l)
            .field("hessian", &self.hess_hplus.is_some())
            .field("inverse_plus", &self.inv_grad_hplus.is_some())
            .field("inverse_minus", &self.inv_grad_hminus.is_some())
            .finish()
    }
}

impl SplitEnergy {
    /// Build a splitting; `H` defaults to `H₊ − H₋`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        dim: usize,
        hplus: ScalarFn,
        hminus: ScalarFn,
        grad_hplus: VecFn,
        grad_hminus: VecFn,
        kappa: f64,
        mu: f64,
        lip_l: f64,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dim must be positive".into()));
        }
        if !(kappa + mu > 0.0) {
            return Err(Error::InvalidArgument(format!("kappa + mu must be positive, got {}", kappa + mu)));
        }
        if !(lip_l > 0.0) || !lip_l.is_finite() {
            return Err(Error::InvalidArgument(format!("lip_l must be positive, got {lip_l}")));
        }
        let (hp, hm) = (hplus.clone(), hminus.clone());
        Ok(Self {
            dim,
            eval_h: Arc::new(move |u| hp(u) - hm(u)),
            eval_hplus: hplus,
            eval_hminus: hminus,
            grad_hplus,
            grad_hminus,
            hess_hplus: None,
            inv_grad_hplus: None,
            inv_grad_hminus: None,
            kappa,
            mu,
            lip_l,
        })
    }

    /// Replace the evaluation of `H` by an independent formula.
    pub fn with_h(mut self, h: ScalarFn) -> Self {
        self.eval_h = h;
        self
    }

    pub fn with_hessian(mut self, hess: MatFn) -> Self {
        self.hess_hplus = Some(hess);
        self
    }

    pub fn with_inverses(mut self, inv_plus: Option<VecFn>, inv_minus: Option<VecFn>) -> Self {
        self.inv_grad_hplus = inv_plus;
        self.inv_grad_hminus = inv_minus;
        self
    }

    /// Heavy-ball splitting of a smooth `h`: `H₊ = ½‖u‖²`, `H₋ = ½‖u‖² − τh`.
    /// The resulting `H` equals `τh`. `lip_h` bounds the curvature of `h`.
    pub fn polyak(dim: usize, h: ScalarFn, grad_h: VecFn, tau: f64, lip_h: f64) -> Result<Self> {
        let h2 = h.clone();
        let hminus: ScalarFn = Arc::new(move |u| 0.5 * dot(u, u) - tau * h2(u));
        let g2 = grad_h.clone();
        let gminus: VecFn = Arc::new(move |u| {
            let g = g2(u);
            u.iter().zip(&g).map(|(x, gi)| x - tau * gi).collect()
        });
        let s = Self::new(
            dim,
            Arc::new(|u| 0.5 * dot(u, u)),
            hminus,
            Arc::new(|u| u.to_vec()),
            gminus,
            1.0,
            1.0 - tau * lip_h,
            1.0,
        )?;
        Ok(s
            .with_h(Arc::new(move |u| tau * h(u)))
            .with_hessian(Arc::new(|u| identity(u.len(), 1.0)))
            .with_inverses(Some(Arc::new(|p| p.to_vec())), None))
    }

    /// The splitting `(H₊ + ‖·‖²/2τ, H₋ + ‖·‖²/2τ)`; DCA on it is the
    /// semi-implicit Euler step of the original splitting.
    pub fn augmented(&self, tau: f64) -> Result<Self> {
        if !(tau > 0.0) {
            return Err(Error::InvalidArgument(format!("tau must be positive, got {tau}")));
        }
        let s = 1.0 / tau;
        let (hp, hm, gp, gm) = (
            self.eval_hplus.clone(),
            self.eval_hminus.clone(),
            self.grad_hplus.clone(),
            self.grad_hminus.clone(),
        );
        let mut out = Self::new(
            self.dim,
            Arc::new(move |u| hp(u) + 0.5 * s * dot(u, u)),
            Arc::new(move |u| hm(u) + 0.5 * s * dot(u, u)),
            Arc::new(move |u| gp(u).iter().zip(u).map(|(g, x)| g + s * x).collect()),
            Arc::new(move |u| gm(u).iter().zip(u).map(|(g, x)| g + s * x).collect()),
            self.kappa + s,
            self.mu + s,
            self.lip_l + s,
        )?
        .with_h(self.eval_h.clone());
        if let Some(h) = &self.hess_hplus {
            let h = h.clone();
            out = out.with_hessian(Arc::new(move |u| {
                let mut m = h(u);
                for (i, row) in m.iter_mut().enumerate() {
                    row[i] += s;
                }
                m
            }));
        }
        Ok(out)
    }

    pub fn h(&self, u: &[f64]) -> f64 {
        (self.eval_h)(u)
    }

    pub fn grad(&self, u: &[f64]) -> Vec<f64> {
        sub(&(self.grad_hplus)(u), &(self.grad_hminus)(u))
    }

    /// Spot-check the declared structure at the given points.
    pub fn validate(&self, points: &[Vec<f64>]) -> SplitValidation {
        let mut rep = SplitValidation::default();
        let fd_h = 1e-5;
        for (k, u) in points.iter().enumerate() {
            let h = self.h(u);
            let hs = (self.eval_hplus)(u) - (self.eval_hminus)(u);
            let rel = (h - hs).abs() / h.abs().max(1.0);
            rep.identity_rel_err = rep.identity_rel_err.max(rel);

            let g = self.grad(u);
            for i in 0..self.dim {
                let mut up = u.clone();
                let mut um = u.clone();
                up[i] += fd_h;
                um[i] -= fd_h;
                let fd = (self.h(&up) - self.h(&um)) / (2.0 * fd_h);
                let rel = (g[i] - fd).abs() / g[i].abs().max(1.0);
                rep.gradient_rel_err = rep.gradient_rel_err.max(rel);
            }

            let v = &points[(k + 1) % points.len()];
            let mid: Vec<f64> = u.iter().zip(v).map(|(a, b)| 0.5 * (a + b)).collect();
            let shifted = |f: &ScalarFn, m: f64, x: &[f64]| f(x) - 0.5 * m * dot(x, x);
            for (f, m, flag) in [
                (&self.eval_hplus, self.kappa, &mut rep.hplus_convex),
                (&self.eval_hminus, self.mu, &mut rep.hminus_convex),
            ] {
                let lhs = shifted(f, m, &mid);
                let rhs = 0.5 * (shifted(f, m, u) + shifted(f, m, v));
                if lhs > rhs + 1e-9 * rhs.abs().max(1.0) {
                    *flag = false;
                }
            }
        }
        rep.passed = rep.identity_rel_err < 1e-10
            && rep.gradient_rel_err < 1e-6
            && rep.hplus_convex
            && rep.hminus_convex;
        rep
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitValidation {
    pub identity_rel_err: f64,
    pub gradient_rel_err: f64,
    pub hplus_convex: bool,
    pub hminus_convex: bool,
    pub passed: bool,
}

impl Default for SplitValidation {
    fn default() -> Self {
        Self { identity_rel_err: 0.0, gradient_rel_err: 0.0, hplus_convex: true, hminus_convex: true, passed: false }
    }
}

/// Uniform points in the cube `[-radius, radius]^dim`.
pub fn sample_points(dim: usize, count: usize, radius: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (0..dim).map(|_| rng.gen_range(-radius..=radius)).collect())
        .collect()
}

/// Perturbation size `t = L − κ − μ` that balances the two halves of a splitting.
pub fn optimal_shift(kappa: f64, mu: f64, lip_l: f64) -> f64 {
    lip_l - kappa - mu
}

pub(crate) fn identity(n: usize, s: f64) -> Vec<Vec<f64>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { s } else { 0.0 }).collect()).collect()
}

/// Momentum potential `b` given by its gradient, with smoothness bound `beta`.
#[derive(Clone)]
pub struct MomentumSpec {
    pub grad_b: VecFn,
    pub beta: f64,
}

impl std::fmt::Debug for MomentumSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MomentumSpec").field("beta", &self.beta).finish()
    }
}

impl MomentumSpec {
    pub fn new(grad_b: VecFn, beta: f64) -> Result<Self> {
        if !(beta >= 0.0) {
            return Err(Error::InvalidArgument(format!("beta must be nonnegative, got {beta}")));
        }
        Ok(Self { grad_b, beta })
    }

    /// `b(u) = β‖u‖²/2`.
    pub fn quadratic(beta: f64) -> Result<Self> {
        Self::new(Arc::new(move |u| u.iter().map(|x| beta * x).collect()), beta)
    }

    pub fn zero() -> Self {
        Self { grad_b: Arc::new(|u| vec![0.0; u.len()]), beta: 0.0 }
    }

    /// Largest observed `‖∇b(x) − ∇b(y)‖ / ‖x − y‖` over consecutive point pairs.
    pub fn observed_lipschitz(&self, points: &[Vec<f64>]) -> f64 {
        points
            .windows(2)
            .filter_map(|w| {
                let d = norm(&sub(&w[0], &w[1]));
                (d > 0.0).then(|| norm(&sub(&(self.grad_b)(&w[0]), &(self.grad_b)(&w[1]))) / d)
            })
            .fold(0.0, f64::max)
    }

    /// `β < (κ + μ)/2` for the given splitting.
    pub fn admissible_for(&self, split: &SplitEnergy) -> bool {
        self.beta < 0.5 * (split.kappa + split.mu)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub max_iters: usize,
    pub grad_tol: f64,
    pub step_tol: f64,
    pub tau: f64,
    pub newton_tol: f64,
    pub newton_max: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { max_iters: 1000, grad_tol: 1e-10, step_tol: 1e-15, tau: 1.0, newton_tol: 1e-12, newton_max: 100 }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.max_iters >= 1
            && self.grad_tol > 0.0
            && self.step_tol > 0.0
            && self.tau > 0.0
            && self.newton_tol > 0.0
            && self.newton_max >= 1;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid solver config {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    GradientTol,
    StepTol,
    MaxIters,
    Diverged,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::GradientTol => "gradient_tol",
            StopReason::StepTol => "step_tol",
            StopReason::MaxIters => "max_iters",
            StopReason::Diverged => "diverged",
        }
    }
}

/// Iterates of a discrete scheme with the monitored quantities.
/// `step_norms[k] = ‖u^{k+1} − u^k‖`, so it is one shorter than `states`.
#[derive(Debug, Clone, PartialEq)]
pub struct IterateTrace {
    pub states: Vec<Vec<f64>>,
    pub energies: Vec<f64>,
    pub step_norms: Vec<f64>,
    pub grad_norms: Vec<f64>,
    pub stop_reason: StopReason,
    /// Dual iterates `pⁿ` for the dual schemes.
    pub duals: Option<Vec<Vec<f64>>>,
}

impl IterateTrace {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Build a trace from bare states, filling in energies and gradient norms.
    pub fn from_states(split: &SplitEnergy, states: Vec<Vec<f64>>, stop_reason: StopReason) -> Self {
        let energies = states.iter().map(|u| split.h(u)).collect();
        let grad_norms = states.iter().map(|u| norm(&split.grad(u))).collect();
        let step_norms = states.windows(2).map(|w| norm(&sub(&w[1], &w[0]))).collect();
        Self { states, energies, step_norms, grad_norms, stop_reason, duals: None }
    }

    pub fn is_consistent(&self) -> bool {
        let n = self.states.len();
        self.energies.len() == n && self.grad_norms.len() == n && self.step_norms.len() + 1 == n.max(1)
    }

    /// True when energies never increase by more than `slack`.
    pub fn is_monotone(&self, slack: f64) -> bool {
        self.energies.windows(2).all(|w| w[1] <= w[0] + slack)
    }

    pub fn last(&self) -> &[f64] {
        self.states.last().map(|v| v.as_slice()).unwrap_or(&[])
    }
}
