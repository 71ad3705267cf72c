//! Built-in test energies, addressable by name.

use std::sync::Arc;

use super::spiral::{spiral_energy, spiral_gradient};
use super::{identity, SplitEnergy};
use crate::error::{Error, Result};
use crate::linalg::dot;

pub const NAMES: [&str; 6] = ["quadratic", "quartic", "double_well", "rosenbrock", "spiral", "exp_flat"];

#[derive(Debug, Clone)]
pub struct RegistryEnergy {
    pub name: &'static str,
    pub split: SplitEnergy,
    /// Łojasiewicz exponent at the attracting critical point, when analytic.
    pub theta: Option<f64>,
    /// Energy value at that critical point.
    pub critical_value: Option<f64>,
    pub default_u0: Vec<f64>,
}

fn diag(v: Vec<f64>) -> Vec<Vec<f64>> {
    let n = v.len();
    (0..n).map(|i| (0..n).map(|j| if i == j { v[i] } else { 0.0 }).collect()).collect()
}

/// Look up an energy in dimension `dim`. `rosenbrock` and `spiral` are planar.
pub fn lookup(name: &str, dim: usize) -> Result<RegistryEnergy> {
    let planar = |n: &str| {
        if dim != 2 {
            Err(Error::InvalidArgument(format!("{n} is defined in dimension 2, got {dim}")))
        } else {
            Ok(())
        }
    };
    let e = match name {
        // H = ½‖u‖², H₊ = ‖u‖², H₋ = ½‖u‖².
        "quadratic" => RegistryEnergy {
            name: "quadratic",
            split: SplitEnergy::new(
                dim,
                Arc::new(|u| dot(u, u)),
                Arc::new(|u| 0.5 * dot(u, u)),
                Arc::new(|u| u.iter().map(|x| 2.0 * x).collect()),
                Arc::new(|u| u.to_vec()),
                2.0,
                1.0,
                2.0,
            )?
            .with_h(Arc::new(|u| 0.5 * dot(u, u)))
            .with_hessian(Arc::new(|u| identity(u.len(), 2.0)))
            .with_inverses(Some(Arc::new(|p| p.iter().map(|x| 0.5 * x).collect())), Some(Arc::new(|p| p.to_vec()))),
            theta: Some(0.5),
            critical_value: Some(0.0),
            default_u0: vec![1.0; dim],
        },
        // H = ¼Σu⁴, H₊ = H + ½‖u‖², H₋ = ½‖u‖². L holds on the cube of radius 2.
        "quartic" => RegistryEnergy {
            name: "quartic",
            split: SplitEnergy::new(
                dim,
                Arc::new(|u| u.iter().map(|x| 0.25 * x.powi(4) + 0.5 * x * x).sum()),
                Arc::new(|u| 0.5 * dot(u, u)),
                Arc::new(|u| u.iter().map(|x| x.powi(3) + x).collect()),
                Arc::new(|u| u.to_vec()),
                1.0,
                1.0,
                13.0,
            )?
            .with_h(Arc::new(|u| u.iter().map(|x| 0.25 * x.powi(4)).sum()))
            .with_hessian(Arc::new(|u| diag(u.iter().map(|x| 3.0 * x * x + 1.0).collect()))),
            theta: Some(0.25),
            critical_value: Some(0.0),
            default_u0: vec![1.0; dim],
        },
        // H = Σ¼(x²−1)², H₊ = Σ(x⁴/4 + x²/2 + ¼), H₋ = Σx².
        "double_well" => RegistryEnergy {
            name: "double_well",
            split: SplitEnergy::new(
                dim,
                Arc::new(|u| u.iter().map(|x| 0.25 * x.powi(4) + 0.5 * x * x + 0.25).sum()),
                Arc::new(|u| dot(u, u)),
                Arc::new(|u| u.iter().map(|x| x.powi(3) + x).collect()),
                Arc::new(|u| u.iter().map(|x| 2.0 * x).collect()),
                1.0,
                2.0,
                13.0,
            )?
            .with_h(Arc::new(|u| u.iter().map(|x| 0.25 * (x * x - 1.0).powi(2)).sum()))
            .with_hessian(Arc::new(|u| diag(u.iter().map(|x| 3.0 * x * x + 1.0).collect()))),
            theta: Some(0.5),
            critical_value: Some(0.0),
            default_u0: vec![0.5; dim],
        },
        // H = (1−x)² + 100(y−x²)², H₊ = H + 300‖u‖², H₋ = 300‖u‖².
        // On [-1.5, 1.5]² the Hessian of H has eigenvalues in [−598, 3415].
        "rosenbrock" => {
            planar("rosenbrock")?;
            let rho = 600.0;
            let h = |u: &[f64]| (1.0 - u[0]).powi(2) + 100.0 * (u[1] - u[0] * u[0]).powi(2);
            let gh = |u: &[f64]| {
                let (x, y) = (u[0], u[1]);
                vec![-2.0 * (1.0 - x) - 400.0 * x * (y - x * x), 200.0 * (y - x * x)]
            };
            RegistryEnergy {
                name: "rosenbrock",
                split: SplitEnergy::new(
                    2,
                    Arc::new(move |u| h(u) + 0.5 * rho * dot(u, u)),
                    Arc::new(move |u| 0.5 * rho * dot(u, u)),
                    Arc::new(move |u| {
                        let g = gh(u);
                        vec![g[0] + rho * u[0], g[1] + rho * u[1]]
                    }),
                    Arc::new(move |u| u.iter().map(|x| rho * x).collect()),
                    1.0,
                    rho,
                    4100.0,
                )?
                .with_h(Arc::new(h))
                .with_hessian(Arc::new(move |u| {
                    let (x, y) = (u[0], u[1]);
                    vec![
                        vec![2.0 - 400.0 * y + 1200.0 * x * x + rho, -400.0 * x],
                        vec![-400.0 * x, 200.0 + rho],
                    ]
                })),
                theta: Some(0.5),
                critical_value: Some(0.0),
                default_u0: vec![-1.0, 1.0],
            }
        }
        // Explicit-Euler splitting with step 1/ρ of the Palis–de Melo energy.
        "spiral" => {
            planar("spiral")?;
            let rho = 200.0;
            RegistryEnergy {
                name: "spiral",
                split: SplitEnergy::new(
                    2,
                    Arc::new(move |u| 0.5 * rho * dot(u, u)),
                    Arc::new(move |u| 0.5 * rho * dot(u, u) - spiral_energy(u)),
                    Arc::new(move |u| u.iter().map(|x| rho * x).collect()),
                    Arc::new(move |u| {
                        let g = spiral_gradient(u);
                        vec![rho * u[0] - g[0], rho * u[1] - g[1]]
                    }),
                    rho,
                    0.0,
                    rho,
                )?
                .with_h(Arc::new(spiral_energy))
                .with_hessian(Arc::new(move |u| identity(u.len(), rho)))
                .with_inverses(Some(Arc::new(move |p| p.iter().map(|x| x / rho).collect())), None),
                theta: None,
                critical_value: None,
                default_u0: vec![1.5, 0.0],
            }
        }
        // H = Σ e^{−1/x²}: C∞ but flat at 0, no Łojasiewicz exponent.
        "exp_flat" => {
            let rho = 4.0;
            let f = |x: f64| if x == 0.0 { 0.0 } else { (-1.0 / (x * x)).exp() };
            let df = move |x: f64| if x == 0.0 { 0.0 } else { 2.0 * f(x) / (x * x * x) };
            RegistryEnergy {
                name: "exp_flat",
                split: SplitEnergy::new(
                    dim,
                    Arc::new(move |u| 0.5 * rho * dot(u, u)),
                    Arc::new(move |u| u.iter().map(|&x| 0.5 * rho * x * x - f(x)).sum()),
                    Arc::new(move |u| u.iter().map(|x| rho * x).collect()),
                    Arc::new(move |u| u.iter().map(|&x| rho * x - df(x)).collect()),
                    rho,
                    0.0,
                    rho,
                )?
                .with_h(Arc::new(move |u| u.iter().map(|&x| f(x)).sum()))
                .with_hessian(Arc::new(move |u| identity(u.len(), rho)))
                .with_inverses(Some(Arc::new(move |p| p.iter().map(|x| x / rho).collect())), None),
                theta: None,
                critical_value: Some(0.0),
                default_u0: vec![0.5; dim],
            }
        }
        other => return Err(Error::UnknownEntry(other.to_string())),
    };
    Ok(e)
}
