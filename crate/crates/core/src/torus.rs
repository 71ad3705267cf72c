//! Uniform periodic grids, FFT helpers and periodized kernels on `𝕋_L`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::spec::parse_spec;

/// `n` nodes `xⱼ = −L/2 + j·dx` on a torus of length `L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusGrid {
    pub l: f64,
    pub n: usize,
    pub dx: f64,
}

impl TorusGrid {
    pub fn new(l: f64, n: usize) -> Result<Self> {
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::InvalidArgument(format!("period must be positive, got {l}")));
        }
        if n < 16 || n % 2 != 0 {
            return Err(Error::InvalidArgument(format!("node count must be even and at least 16, got {n}")));
        }
        Ok(Self { l, n, dx: l / n as f64 })
    }

    pub fn x(&self, j: usize) -> f64 {
        -0.5 * self.l + j as f64 * self.dx
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    /// Rectangle-rule integral.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        f.iter().sum::<f64>() * self.dx
    }

    pub fn l2_norm(&self, f: &[f64]) -> f64 {
        (f.iter().map(|v| v * v).sum::<f64>() * self.dx).sqrt()
    }

    /// Signed wavenumber `2πm/L` of FFT index `m`.
    pub fn wavenumber(&self, m: usize) -> f64 {
        let mm = if m <= self.n / 2 { m as f64 } else { m as f64 - self.n as f64 };
        2.0 * PI * mm / self.l
    }
}

/// Cached FFT plans for a grid.
#[derive(Clone)]
pub struct Spectral {
    pub grid: TorusGrid,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    /// Wavenumbers with the Nyquist mode zeroed, used for derivatives.
    k: Vec<f64>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("grid", &self.grid).finish()
    }
}

impl Spectral {
    pub fn new(grid: TorusGrid) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(grid.n);
        let inv = planner.plan_fft_inverse(grid.n);
        let k = (0..grid.n).map(|m| if m == grid.n / 2 { 0.0 } else { grid.wavenumber(m) }).collect();
        Self { grid, fwd, inv, k }
    }

    pub fn forward(&self, u: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = u.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fwd.process(&mut buf);
        buf
    }

    /// Inverse transform (normalized by `1/n`), real part.
    pub fn inverse(&self, mut spec: Vec<Complex64>) -> Vec<f64> {
        self.inv.process(&mut spec);
        let s = 1.0 / self.grid.n as f64;
        spec.iter().map(|c| c.re * s).collect()
    }

    /// Multiply the spectrum of `u` by a real multiplier.
    pub fn apply(&self, mult: &[f64], u: &[f64]) -> Vec<f64> {
        let mut s = self.forward(u);
        for (c, m) in s.iter_mut().zip(mult) {
            *c *= *m;
        }
        self.inverse(s)
    }

    /// Wavenumbers per FFT index, Nyquist zeroed.
    pub fn k(&self) -> &[f64] {
        &self.k
    }

    /// Spectral derivative of order `order`, Nyquist mode dropped so that
    /// `D²` is the square of `D`.
    pub fn derivative(&self, u: &[f64], order: u32) -> Vec<f64> {
        let mut s = self.forward(u);
        let i = Complex64::new(0.0, 1.0);
        for (c, &k) in s.iter_mut().zip(&self.k) {
            *c *= (i * k).powu(order);
        }
        self.inverse(s)
    }
}

/// Kernels on ℝ, normalized to unit mass except `Lorentz` (mass `1/c`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelSpec {
    /// `e^{−x²/2σ²}/(σ√2π)`.
    Gaussian { sigma: f64 },
    /// `(α/2)e^{−α|x|}`.
    Exponential { alpha: f64 },
    /// `sech²(x/w)/(2w)`.
    Sech2 { width: f64 },
    /// Defined by its spectrum `1/(c + k²)`; in real space `e^{−√c|x|}/(2√c)`.
    Lorentz { c: f64 },
}

pub const KERNEL_REGISTRY: [&str; 4] = ["gaussian(sigma)", "exponential(alpha)", "sech2(width)", "lorentz(c)"];

impl KernelSpec {
    pub fn parse(s: &str) -> Result<Self> {
        let spec = parse_spec(s)?;
        let pos = |key: &str| -> Result<f64> {
            let v = spec.get_or(key, 1.0);
            if v > 0.0 {
                Ok(v)
            } else {
                Err(Error::BadSpec(format!("`{key}` must be positive, got {v}")))
            }
        };
        let k = match spec.name.as_str() {
            "gaussian" => {
                spec.expect_keys(&["sigma"])?;
                KernelSpec::Gaussian { sigma: pos("sigma")? }
            }
            "exponential" => {
                spec.expect_keys(&["alpha"])?;
                KernelSpec::Exponential { alpha: pos("alpha")? }
            }
            "sech2" => {
                spec.expect_keys(&["width"])?;
                KernelSpec::Sech2 { width: pos("width")? }
            }
            "lorentz" => {
                spec.expect_keys(&["c"])?;
                KernelSpec::Lorentz { c: pos("c")? }
            }
            other => return Err(Error::UnknownEntry(other.to_string())),
        };
        Ok(k)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let x = x.abs();
        match *self {
            KernelSpec::Gaussian { sigma } => (-0.5 * (x / sigma).powi(2)).exp() / (sigma * (2.0 * PI).sqrt()),
            KernelSpec::Exponential { alpha } => 0.5 * alpha * (-alpha * x).exp(),
            KernelSpec::Sech2 { width } => {
                let s = 1.0 / (x / width).cosh();
                s * s / (2.0 * width)
            }
            KernelSpec::Lorentz { c } => {
                let r = c.sqrt();
                (-r * x).exp() / (2.0 * r)
            }
        }
    }

    /// `∫_ℝ K(x) e^{−iλx} dx`.
    pub fn spectrum(&self, lambda: f64) -> f64 {
        match *self {
            KernelSpec::Gaussian { sigma } => (-0.5 * (sigma * lambda).powi(2)).exp(),
            KernelSpec::Exponential { alpha } => alpha * alpha / (alpha * alpha + lambda * lambda),
            KernelSpec::Sech2 { width } => {
                let z = 0.5 * PI * width * lambda;
                if z.abs() < 1e-8 {
                    1.0
                } else if z.abs() > 700.0 {
                    0.0
                } else {
                    z / z.sinh()
                }
            }
            KernelSpec::Lorentz { c } => 1.0 / (c + lambda * lambda),
        }
    }

    pub fn mass(&self) -> f64 {
        self.spectrum(0.0)
    }

    /// Convex on `[0, ∞)`, which makes the periodization bell-shaped.
    pub fn convex_on_half_line(&self) -> bool {
        matches!(self, KernelSpec::Exponential { .. } | KernelSpec::Lorentz { .. })
    }

    /// Upper bound on `∫_x^∞ K` for `x > 0`.
    fn tail_mass(&self, x: f64) -> f64 {
        match *self {
            KernelSpec::Gaussian { sigma } => self.eval(x) * sigma * sigma / x,
            KernelSpec::Exponential { alpha } => self.eval(x) / alpha,
            KernelSpec::Sech2 { width } => 0.5 * (1.0 - (x / width).tanh()),
            KernelSpec::Lorentz { c } => self.eval(x) / c.sqrt(),
        }
    }

    /// Closed-form periodization where one exists.
    fn periodized_closed_form(&self, x: f64, l: f64) -> Option<f64> {
        let r = match *self {
            KernelSpec::Exponential { alpha } => alpha,
            KernelSpec::Lorentz { c } => c.sqrt(),
            _ => return None,
        };
        let x = x.abs();
        // Σₖ e^{−r|x−kL|} = cosh(r(L/2 − |x|))/sinh(rL/2) for |x| ≤ L/2.
        let h = 0.5 * r * l;
        let y = r * (0.5 * l - x);
        let ratio = if h > 300.0 { (y - h).exp() * (1.0 + (-2.0 * y).exp()) / (1.0 - (-2.0 * h).exp()) } else { y.cosh() / h.sinh() };
        Some(self.eval(0.0) * ratio)
    }

    pub fn is_spectrum_defined(&self) -> bool {
        matches!(self, KernelSpec::Lorentz { .. })
    }
}

/// `K_L` sampled on a grid, with the spectral multiplier used by [`PeriodizedKernel::convolve`].
#[derive(Clone, Debug)]
pub struct PeriodizedKernel {
    pub spec: KernelSpec,
    pub grid: TorusGrid,
    /// `K_L(xⱼ)`.
    pub values: Vec<f64>,
    /// `Σⱼ K_L(xⱼ) dx`.
    pub mass: f64,
    /// `K̂(2πk/L)`, `k = 0..=n/2`, from the closed form.
    pub spectrum: Vec<f64>,
    /// Real multiplier per FFT index: `DFT(K_L)·dx` for real-space kernels,
    /// the analytic spectrum for spectrum-defined ones.
    pub multiplier: Vec<f64>,
    /// Number of periodic images summed on each side.
    pub images: usize,
    pub bell_shaped: bool,
    pub spectral: Spectral,
}

const MAX_IMAGES: usize = 100_000;

/// Sample the `L`-periodization `K_L(x) = Σₖ K(x − kL)`, truncating once the
/// remaining images contribute less than `tol`.
pub fn periodize(spec: KernelSpec, grid: TorusGrid, tol: f64) -> Result<PeriodizedKernel> {
    let l = grid.l;
    let mut images = 0;
    let values: Vec<f64> = match (0..grid.n).map(|j| spec.periodized_closed_form(grid.x(j), l)).collect::<Option<Vec<_>>>() {
        Some(v) => v,
        None => {
            // Images beyond m contribute at most 2(K((m+½)L) + tail/L) anywhere on the cell.
            let bound = |m: usize| {
                let r = (m as f64 + 0.5) * l;
                2.0 * (spec.eval(r) + spec.tail_mass(r) / l)
            };
            while bound(images) >= tol {
                images += 1;
                if images > MAX_IMAGES {
                    return Err(Error::TailNotConverged { images });
                }
            }
            (0..grid.n)
                .map(|j| {
                    let x = grid.x(j);
                    let mut s = spec.eval(x);
                    for m in 1..=images {
                        let ml = m as f64 * l;
                        s += spec.eval(x - ml) + spec.eval(x + ml);
                    }
                    s
                })
                .collect()
        }
    };
    let spectral = Spectral::new(grid);
    let mass = grid.integrate(&values);
    let spectrum: Vec<f64> = (0..=grid.n / 2).map(|k| spec.spectrum(2.0 * PI * k as f64 / l)).collect();
    let multiplier = if spec.is_spectrum_defined() {
        (0..grid.n).map(|m| spec.spectrum(grid.wavenumber(m))).collect()
    } else {
        // Offsets mdx sit at node index m + n/2.
        let half = grid.n / 2;
        let offsets: Vec<f64> = (0..grid.n).map(|m| values[(m + half) % grid.n]).collect();
        spectral.forward(&offsets).iter().map(|c| c.re * grid.dx).collect()
    };
    let bell_shaped = crate::cd::is_bell_shaped(&values, 1e-12);
    Ok(PeriodizedKernel { spec, grid, values, mass, spectrum, multiplier, images, bell_shaped, spectral })
}

impl PeriodizedKernel {
    /// `(K∗w)(xⱼ) = ∫K_L(xⱼ − y)w(y)dy`, computed spectrally.
    pub fn convolve(&self, w: &[f64]) -> Vec<f64> {
        self.spectral.apply(&self.multiplier, w)
    }

    /// Direct `O(n²)` rectangle-rule convolution, for cross-checks.
    pub fn convolve_direct(&self, w: &[f64]) -> Vec<f64> {
        let n = self.grid.n;
        let half = n / 2;
        (0..n)
            .map(|j| {
                (0..n)
                    .map(|k| self.values[(j + n - k + half) % n] * w[k])
                    .sum::<f64>()
                    * self.grid.dx
            })
            .collect()
    }

    /// `Σⱼ K_L(xⱼ) cos(λxⱼ) dx`.
    pub fn spectrum_quadrature(&self, lambda: f64) -> f64 {
        (0..self.grid.n).map(|j| self.values[j] * (lambda * self.grid.x(j)).cos()).sum::<f64>() * self.grid.dx
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `‖K_L‖_{L^q}` on the torus.
    pub fn lq_norm(&self, q: f64) -> f64 {
        (self.values.iter().map(|v| v.abs().powf(q)).sum::<f64>() * self.grid.dx).powf(1.0 / q)
    }

    /// Largest `|K_L(x) − K_L(−x)|` over the nodes.
    pub fn asymmetry(&self) -> f64 {
        let n = self.grid.n;
        (0..n).map(|j| (self.values[j] - self.values[(n - j) % n]).abs()).fold(0.0, f64::max)
    }
}
