use super::{SolverConfig, SplitEnergy};
use crate::error::{ensure_finite, Error, Result};
use crate::linalg::{dot, norm, solve_dense};

/// Solve `∇H₊(x) + shift·x = target` by damped Newton.
///
/// The merit function `φ(x) = H₊(x) + shift/2‖x‖² − target·x` is strongly convex
/// when `κ + shift > 0`, so its unique critical point is the root. Uses the
/// closed-form inverse when `shift == 0` and one is supplied, the analytic
/// Hessian when present, otherwise a central-difference Jacobian.
pub fn solve_shifted(
    split: &SplitEnergy,
    shift: f64,
    target: &[f64],
    guess: &[f64],
    cfg: &SolverConfig,
) -> Result<Vec<f64>> {
    ensure_finite(target, "implicit solve target")?;
    if shift == 0.0 {
        if let Some(inv) = &split.inv_grad_hplus {
            let x = inv(target);
            ensure_finite(&x, "inverse gradient")?;
            return Ok(x);
        }
    }
    if !(split.kappa + shift > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "implicit part is not strongly convex (kappa + shift = {})",
            split.kappa + shift
        )));
    }
    let d = split.dim;
    let resid = |x: &[f64]| -> Vec<f64> {
        let g = (split.grad_hplus)(x);
        (0..d).map(|i| g[i] + shift * x[i] - target[i]).collect()
    };
    let merit = |x: &[f64]| (split.eval_hplus)(x) + 0.5 * shift * dot(x, x) - dot(target, x);
    let scale = norm(target).max(1.0);

    let mut x = guess.to_vec();
    let mut r = resid(&x);
    let mut rn = norm(&r);
    for _ in 0..cfg.newton_max {
        if !rn.is_finite() {
            return Err(Error::NonFinite("implicit solve residual"));
        }
        if rn <= cfg.newton_tol * scale {
            return Ok(x);
        }
        let jac = match &split.hess_hplus {
            Some(h) => {
                let mut m = h(&x);
                for (i, row) in m.iter_mut().enumerate() {
                    row[i] += shift;
                }
                m
            }
            None => fd_jacobian(&resid, &x),
        };
        let neg_r: Vec<f64> = r.iter().map(|v| -v).collect();
        let dir = solve_dense(&jac, &neg_r).ok_or(Error::NonConvergedImplicitSolve { iters: 0, residual: rn })?;
        let phi0 = merit(&x);
        let slope = dot(&r, &dir);
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let trial: Vec<f64> = x.iter().zip(&dir).map(|(a, b)| a + t * b).collect();
            let rt = resid(&trial);
            let rtn = norm(&rt);
            if rtn.is_finite() && (merit(&trial) <= phi0 + 1e-4 * t * slope || rtn < rn) {
                x = trial;
                r = rt;
                rn = rtn;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if rn <= cfg.newton_tol * scale {
        Ok(x)
    } else {
        Err(Error::NonConvergedImplicitSolve { iters: cfg.newton_max, residual: rn })
    }
}

fn fd_jacobian<F: Fn(&[f64]) -> Vec<f64>>(f: &F, x: &[f64]) -> Vec<Vec<f64>> {
    let d = x.len();
    let mut jac = vec![vec![0.0; d]; d];
    for j in 0..d {
        let h = 1e-6 * x[j].abs().max(1.0);
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[j] += h;
        xm[j] -= h;
        let (fp, fm) = (f(&xp), f(&xm));
        for i in 0..d {
            jac[i][j] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    jac
}
