//! Symmetric Lotka–Volterra dynamics: the continuous flow, its square-root
//! de-singularization, the Shahshahani discrete scheme, convex-splitting
//! schemes with scalar cubic solves, regularized variants and a 1-D
//! mutation PDE.

mod continuous;
mod discrete;
mod mutation;
mod regularized;
mod splitting;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::spec::parse_spec;

pub use continuous::{integrate_continuous, integrate_sqrt, LVTrace};
pub use discrete::{
    check_discrete_properties, discrete_step_shahshahani, entropy_trap_monitor, iterate_shahshahani, m_epsilon,
    PropositionReport, TrapReport,
};
pub use mutation::{MutationGrid, MutationStepInfo};
pub use regularized::{grad_g, reg_lv_desing_rhs, reg_lv_mirror_step, reg_lv_rhs, MirrorMode};
pub use splitting::{
    build_splitting, cubic_solve_monotone, cubic_solve_odd, dca_lv_step, semi_implicit_lv_step, solve_s_coupled,
    spectral_radius, LVSplitting,
};

pub const REGISTRY: [&str; 4] = ["logistic", "competitive2", "extinction2", "random_competitive(n, seed)"];

/// `f'ᵢ = dᵢfᵢ(aᵢ − (Bf)ᵢ)` with symmetric `B`.
#[derive(Debug, Clone, PartialEq)]
pub struct LVSystem {
    pub a: Vec<f64>,
    pub b: Vec<Vec<f64>>,
    pub d: Vec<f64>,
}

impl LVSystem {
    pub fn new(a: Vec<f64>, b: Vec<Vec<f64>>, d: Vec<f64>) -> Result<Self> {
        let n = a.len();
        if n == 0 || d.len() != n || b.len() != n || b.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidArgument("inconsistent LV dimensions".into()));
        }
        if a.iter().chain(&d).any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidArgument("growth rates and weights must be positive".into()));
        }
        let asym = max_asymmetry(&b);
        if asym >= 1e-12 {
            return Err(Error::NotSymmetric(asym));
        }
        Ok(Self { a, b, d })
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn is_competitive(&self) -> bool {
        self.b.iter().flatten().all(|&x| x > 0.0)
    }

    pub fn b_min(&self) -> f64 {
        self.b.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn bf(&self, f: &[f64]) -> Vec<f64> {
        self.b.iter().map(|row| row.iter().zip(f).map(|(x, y)| x * y).sum()).collect()
    }

    /// `a − Bf`.
    pub fn fitness(&self, f: &[f64]) -> Vec<f64> {
        let bf = self.bf(f);
        self.a.iter().zip(bf).map(|(a, b)| a - b).collect()
    }

    /// Logistic system `f' = f(1 − f)`.
    pub fn logistic() -> Self {
        Self { a: vec![1.0], b: vec![vec![1.0]], d: vec![1.0] }
    }

    /// `B = [[2,1],[1,2]]`, `a = d = (1,1)`; interior equilibrium `(1/3, 1/3)`.
    pub fn competitive2() -> Self {
        Self { a: vec![1.0, 1.0], b: vec![vec![2.0, 1.0], vec![1.0, 2.0]], d: vec![1.0, 1.0] }
    }

    /// `a = (1, 0.2)`, `B = [[1, 0.5],[0.5, 1]]`: species 2 dies out, limit `(1, 0)`.
    pub fn extinction2() -> Self {
        Self { a: vec![1.0, 0.2], b: vec![vec![1.0, 0.5], vec![0.5, 1.0]], d: vec![1.0, 1.0] }
    }

    /// Symmetric positive `B` with diagonal in `[1, 2]`, off-diagonal in
    /// `[0.05, 0.4]`; `a` in `[0.5, 1.5]`; `d` in `[0.5, 1.5]`.
    pub fn random_competitive(n: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut b = vec![vec![0.0; n]; n];
        for i in 0..n {
            b[i][i] = rng.gen_range(1.0..2.0);
            for j in i + 1..n {
                let v = rng.gen_range(0.05..0.4);
                b[i][j] = v;
                b[j][i] = v;
            }
        }
        let a = (0..n).map(|_| rng.gen_range(0.5..1.5)).collect();
        let d = (0..n).map(|_| rng.gen_range(0.5..1.5)).collect();
        Self::new(a, b, d)
    }

    /// Resolve a registry name such as `competitive2` or `random_competitive(n=5, seed=3)`.
    /// A `seed` argument in the name takes precedence over `default_seed`.
    pub fn from_registry(name: &str, default_seed: u64) -> Result<Self> {
        let spec = parse_spec(name)?;
        match spec.name.as_str() {
            "logistic" | "competitive2" | "extinction2" => {
                spec.expect_keys(&[])?;
                Ok(match spec.name.as_str() {
                    "logistic" => Self::logistic(),
                    "competitive2" => Self::competitive2(),
                    _ => Self::extinction2(),
                })
            }
            "random_competitive" => {
                spec.expect_keys(&["n", "seed"])?;
                let n = spec.get_or("n", 5.0);
                if n < 1.0 || n > 1000.0 || n.fract() != 0.0 {
                    return Err(Error::BadSpec(format!("n must be an integer in [1, 1000], got {n}")));
                }
                let seed = match spec.get("seed") {
                    Some(s) if s >= 0.0 && s.fract() == 0.0 && s < 9.007e15 => s as u64,
                    Some(s) => return Err(Error::BadSpec(format!("seed must be a nonnegative integer, got {s}"))),
                    None => default_seed,
                };
                Self::random_competitive(n as usize, seed)
            }
            other => Err(Error::UnknownEntry(other.to_string())),
        }
    }
}

pub(crate) fn max_asymmetry(b: &[Vec<f64>]) -> f64 {
    let n = b.len();
    let mut m: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            m = m.max((b[i][j] - b[j][i]).abs());
        }
    }
    m
}

fn check_positive(f: &[f64]) -> Result<()> {
    for (i, &v) in f.iter().enumerate() {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::NonPositiveState { index: i, value: v });
        }
    }
    Ok(())
}

pub fn lv_rhs(sys: &LVSystem, f: &[f64]) -> Result<Vec<f64>> {
    check_positive(f)?;
    Ok(lv_rhs_unchecked(sys, f))
}

pub(crate) fn lv_rhs_unchecked(sys: &LVSystem, f: &[f64]) -> Vec<f64> {
    let r = sys.fitness(f);
    (0..sys.n()).map(|i| sys.d[i] * f[i] * r[i]).collect()
}

/// `E(f) = a·f − ½fᵀBf`, nondecreasing along the flow.
pub fn energy_e(sys: &LVSystem, f: &[f64]) -> f64 {
    let bf = sys.bf(f);
    (0..sys.n()).map(|i| f[i] * sys.a[i] - 0.5 * f[i] * bf[i]).sum()
}

/// Relative entropy with reference `f_tilde`, weights `w` and an optional
/// quadratic term `quad_coeff·Σ(f − f̃)²`.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropySpec {
    pub f_tilde: Vec<f64>,
    pub w: Vec<f64>,
    pub quad_coeff: f64,
}

impl EntropySpec {
    /// Weights `wᵢ = 1/dᵢ`, no quadratic term.
    pub fn continuous(sys: &LVSystem, f_tilde: Vec<f64>) -> Result<Self> {
        Self::new(f_tilde, sys.d.iter().map(|d| 1.0 / d).collect(), 0.0)
    }

    /// Modified entropy of the discrete scheme: quadratic coefficient `λτ/2`.
    pub fn discrete(sys: &LVSystem, f_tilde: Vec<f64>, lambda: f64, tau: f64) -> Result<Self> {
        Self::new(f_tilde, sys.d.iter().map(|d| 1.0 / d).collect(), 0.5 * lambda * tau)
    }

    pub fn new(f_tilde: Vec<f64>, w: Vec<f64>, quad_coeff: f64) -> Result<Self> {
        if f_tilde.len() != w.len() {
            return Err(Error::InvalidArgument("f_tilde and w differ in length".into()));
        }
        if w.iter().any(|x| !(*x > 0.0)) || f_tilde.iter().any(|x| !(*x >= 0.0)) || !(quad_coeff >= 0.0) {
            return Err(Error::InvalidArgument("entropy needs w > 0, f_tilde >= 0, quad_coeff >= 0".into()));
        }
        Ok(Self { f_tilde, w, quad_coeff })
    }
}

/// `F(f) = Σwᵢ(f̃ᵢ log(f̃ᵢ/fᵢ) + fᵢ − f̃ᵢ) + quad_coeff·Σ(fᵢ − f̃ᵢ)²`.
pub fn entropy_f(spec: &EntropySpec, f: &[f64]) -> Result<f64> {
    check_positive(f)?;
    let mut s = 0.0;
    for i in 0..f.len() {
        let ft = spec.f_tilde[i];
        let log_term = if ft > 0.0 { ft * (ft / f[i]).ln() } else { 0.0 };
        s += spec.w[i] * (log_term + f[i] - ft) + spec.quad_coeff * (f[i] - ft).powi(2);
    }
    Ok(s)
}

/// `u'ᵢ = ½dᵢuᵢ(aᵢ − Σⱼ Bᵢⱼuⱼ²)`, the flow of `f = u²`.
pub fn sqrt_rhs(sys: &LVSystem, u: &[f64]) -> Result<Vec<f64>> {
    check_positive(u)?;
    Ok(sqrt_rhs_unchecked(sys, u))
}

pub(crate) fn sqrt_rhs_unchecked(sys: &LVSystem, u: &[f64]) -> Vec<f64> {
    let f: Vec<f64> = u.iter().map(|x| x * x).collect();
    let r = sys.fitness(&f);
    (0..sys.n()).map(|i| 0.5 * sys.d[i] * u[i] * r[i]).collect()
}

/// `H(u) = −¼Σaᵢuᵢ² + ⅛ΣBᵢⱼuᵢ²uⱼ²`; equals `−¼E(u²)`.
pub fn sqrt_energy(sys: &LVSystem, u: &[f64]) -> f64 {
    let f: Vec<f64> = u.iter().map(|x| x * x).collect();
    -0.25 * energy_e(sys, &f)
}

/// `∇H(u)ᵢ = −½aᵢuᵢ + ½uᵢ(B u²)ᵢ`, so that `u' = −diag(d)∇H(u)`.
pub fn sqrt_energy_grad(sys: &LVSystem, u: &[f64]) -> Vec<f64> {
    let f: Vec<f64> = u.iter().map(|x| x * x).collect();
    let r = sys.fitness(&f);
    (0..sys.n()).map(|i| -0.5 * u[i] * r[i]).collect()
}

/// `max |diag(f)(a − Bf)|`, zero at interior and boundary equilibria.
pub fn equilibrium_residual(sys: &LVSystem, f: &[f64]) -> f64 {
    let r = sys.fitness(f);
    f.iter().zip(r).fold(0.0, |m, (x, y)| m.max((x * y).abs()))
}
