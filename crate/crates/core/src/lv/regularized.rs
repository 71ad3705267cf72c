use super::splitting::{cubic_solve_odd, solve_s_coupled, LVSplitting};
use super::{check_positive, LVSystem};
use crate::error::{Error, Result};

/// `f'ᵢ = −fᵢ/(μ + νfᵢ) · ∇H(f)ᵢ`.
pub fn reg_lv_rhs(grad_h: &dyn Fn(&[f64]) -> Vec<f64>, mu: f64, nu: f64, f: &[f64]) -> Result<Vec<f64>> {
    check_positive(f)?;
    let g = grad_h(f);
    Ok(f.iter().zip(g).map(|(fi, gi)| -fi / (mu + nu * fi) * gi).collect())
}

/// `u'ᵢ = −∇Ĥ(u)ᵢ/(μ̂ + ν̂uᵢ²)`; with `Ĥ(u) = H(u²)`, `μ̂ = 4μ`, `ν̂ = 4ν`
/// this is the flow of `f = u²` under [`reg_lv_rhs`].
pub fn reg_lv_desing_rhs(grad_hhat: &dyn Fn(&[f64]) -> Vec<f64>, mu_hat: f64, nu_hat: f64, u: &[f64]) -> Result<Vec<f64>> {
    check_positive(u)?;
    let g = grad_hhat(u);
    Ok(u.iter().zip(g).map(|(ui, gi)| -gi / (mu_hat + nu_hat * ui * ui)).collect())
}

/// `∇g(u)ᵢ = μuᵢ + (ν/3)uᵢ³` for `g(u) = (μ/2)‖u‖² + (ν/12)Σuᵢ⁴`.
pub fn grad_g(mu: f64, nu: f64, u: &[f64]) -> Vec<f64> {
    u.iter().map(|x| mu * x + nu / 3.0 * x.powi(3)).collect()
}

#[derive(Debug, Clone, Copy)]
pub enum MirrorMode<'a> {
    /// `∇g(u⁺) = ∇g(u) − τ∇H(u)`.
    Euler,
    /// `∇g(u⁺) + τ∇H₊(u⁺) = ∇g(u) + τ∇H₋(u)` for the quartic LV energy split
    /// by `B⁺ = λI + β𝟙𝟙ᵀ`; the caller's `grad_h` is not used.
    SemiImplicit { split: &'a LVSplitting, sys: &'a LVSystem },
}

/// One preconditioned step with mirror map `g`.
pub fn reg_lv_mirror_step(
    grad_h: &dyn Fn(&[f64]) -> Vec<f64>,
    mu: f64,
    nu: f64,
    tau: f64,
    u: &[f64],
    mode: MirrorMode<'_>,
) -> Result<Vec<f64>> {
    check_positive(u)?;
    if !(mu > 0.0) || !(nu >= 0.0) || !(tau > 0.0) {
        return Err(Error::InvalidArgument("need mu > 0, nu >= 0, tau > 0".into()));
    }
    let gg = grad_g(mu, nu, u);
    let x = match mode {
        MirrorMode::Euler => {
            let g = grad_h(u);
            gg.iter().zip(g).map(|(a, b)| cubic_solve_odd(nu / 3.0, mu, a - tau * b)).collect::<Vec<_>>()
        }
        MirrorMode::SemiImplicit { split, sys } => {
            // ∇H₊ᵢ = ½λuᵢ³ + ½βS uᵢ, ∇H₋ᵢ = ½uᵢ(a + B⁻u²)ᵢ.
            let f: Vec<f64> = u.iter().map(|x| x * x).collect();
            let v: Vec<f64> = (0..sys.n())
                .map(|i| {
                    let bm: f64 = split.bminus[i].iter().zip(&f).map(|(b, fj)| b * fj).sum();
                    gg[i] + 0.5 * tau * u[i] * (sys.a[i] + bm)
                })
                .collect();
            let s0 = f.iter().sum();
            solve_s_coupled(nu / 3.0 + 0.5 * tau * split.lambda, mu, 0.5 * tau * split.beta, &v, s0)?.0
        }
    };
    if let Some(i) = x.iter().position(|v| !(*v > 0.0)) {
        return Err(Error::PositivityLost { index: i, halvings: 0 });
    }
    Ok(x)
}
