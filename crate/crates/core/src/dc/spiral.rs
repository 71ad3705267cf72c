//! The C∞ energy of Palis and de Melo, and the flat scalar `e^{-1/|x|}`.

use crate::error::{Error, Result};

/// `(E, ∂E/∂r, ∂E/∂θ)` in polar coordinates.
fn polar_parts(r: f64, theta: f64) -> (f64, f64, f64) {
    if r > 1.0 {
        let s = r * r - 1.0;
        let g = (-1.0 / s).exp();
        if g == 0.0 {
            return (0.0, 0.0, 0.0);
        }
        let phi = 1.0 / (r - 1.0) - theta;
        let (sp, cp) = phi.sin_cos();
        let e = g * sp;
        let er = g * (2.0 * r / (s * s)) * sp - g * cp / ((r - 1.0) * (r - 1.0));
        let et = -g * cp;
        (e, er, et)
    } else if r < 1.0 {
        let s = r * r - 1.0;
        let g = (1.0 / s).exp();
        (g, -g * 2.0 * r / (s * s), 0.0)
    } else {
        (0.0, 0.0, 0.0)
    }
}

pub fn spiral_energy(u: &[f64]) -> f64 {
    let (x, y) = (u[0], u[1]);
    polar_parts(x.hypot(y), y.atan2(x)).0
}

pub fn spiral_gradient(u: &[f64]) -> Vec<f64> {
    let (x, y) = (u[0], u[1]);
    let r = x.hypot(y);
    if r == 0.0 {
        return vec![0.0, 0.0];
    }
    let (_, er, et) = polar_parts(r, y.atan2(x));
    vec![er * x / r - et * y / (r * r), er * y / r + et * x / (r * r)]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarSample {
    pub t: f64,
    pub r: f64,
    /// Unwrapped angle (total angular travel is `theta − theta₀`).
    pub theta: f64,
    pub energy: f64,
}

/// RK4 integration of the gradient flow of the spiral energy in polar form,
/// `r' = −∂E/∂r`, `θ' = −∂E/∂θ / r²`, from `(r0, theta0)` with `r0 > 1`.
pub fn check_nonconvergence_example(r0: f64, theta0: f64, t_max: f64, dt: f64) -> Result<Vec<PolarSample>> {
    if !(r0 > 1.0) {
        return Err(Error::InvalidArgument(format!("r0 must exceed 1, got {r0}")));
    }
    if !(dt > 0.0) || !(t_max >= 0.0) {
        return Err(Error::InvalidArgument("dt must be positive and t_max nonnegative".into()));
    }
    let f = |y: &[f64]| {
        let (_, er, et) = polar_parts(y[0], y[1]);
        vec![-er, -et / (y[0] * y[0])]
    };
    let steps = (t_max / dt).round() as usize;
    let mut y = vec![r0, theta0];
    let mut out = Vec::with_capacity(steps + 1);
    out.push(PolarSample { t: 0.0, r: r0, theta: theta0, energy: polar_parts(r0, theta0).0 });
    for k in 1..=steps {
        let next = crate::ode::rk4_step(&f, &y, dt);
        if !next.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("spiral flow"));
        }
        if next[0] <= 1.0 {
            return Err(Error::StepTooLarge(format!("r crossed 1 at step {k} (dt = {dt})")));
        }
        y = next;
        out.push(PolarSample { t: k as f64 * dt, r: y[0], theta: y[1], energy: polar_parts(y[0], y[1]).0 });
    }
    Ok(out)
}

/// `ln(|f(y)|^θ / f'(y))` for `f(y) = e^{−1/y}`, `y > 0`, which equals
/// `(1 − θ)/y + 2 ln y`. The log form avoids overflow for small `y`.
pub fn nonanalytic_log_ratio(y: f64, theta: f64) -> f64 {
    (1.0 - theta) / y + 2.0 * y.ln()
}
