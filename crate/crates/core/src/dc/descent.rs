use super::IterateTrace;

const EQ_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct DescentReport {
    /// `H(uᵏ) − H(uᵏ⁺¹) ≥ σ‖∇H(uᵏ)‖‖uᵏ⁺¹ − uᵏ‖` per step.
    pub primary: Vec<bool>,
    /// Equal energies imply equal points, per step.
    pub complementary: Vec<bool>,
    /// Smallest `lhs − σ·rhs` over all steps (0 for an empty trace).
    pub worst_margin: f64,
    /// Largest σ for which the primary condition holds on every step with a
    /// nonzero right side; `None` when there is no such step.
    pub best_sigma: Option<f64>,
    pub holds: bool,
}

/// Check the primary and complementary descent conditions with constant `sigma`.
///
/// Energies closer than `tol = 1e-12·max(1, |H|)` count as equal; the primary
/// condition is granted the same slack. Equal energies only pin the step down
/// to `O(√tol)`, so the complementary condition fails for steps above `√tol`.
pub fn check_strong_descent(trace: &IterateTrace, sigma: f64) -> DescentReport {
    let mut primary = Vec::new();
    let mut complementary = Vec::new();
    let mut worst = f64::INFINITY;
    let mut best: Option<f64> = None;
    for k in 0..trace.step_norms.len() {
        let h0 = trace.energies[k];
        let h1 = trace.energies[k + 1];
        let tol = EQ_TOL * h0.abs().max(1.0);
        let lhs = h0 - h1;
        let rhs = trace.grad_norms[k] * trace.step_norms[k];
        let margin = lhs - sigma * rhs;
        worst = worst.min(margin);
        primary.push(margin >= -tol);
        let equal_energy = lhs.abs() <= tol;
        complementary.push(!equal_energy || trace.step_norms[k] <= tol.sqrt());
        if rhs > 0.0 {
            let s = lhs / rhs;
            best = Some(best.map_or(s, |b: f64| b.min(s)));
        }
    }
    let holds = primary.iter().all(|&b| b) && complementary.iter().all(|&b| b);
    DescentReport {
        primary,
        complementary,
        worst_margin: if worst.is_finite() { worst } else { 0.0 },
        best_sigma: best,
        holds,
    }
}

/// The doubled energy `M(uⁿ⁺¹, uⁿ) = H(uⁿ⁺¹) + ((κ+μ)/4)‖uⁿ⁺¹ − uⁿ‖²` along a trace.
pub fn momentum_surrogate(trace: &IterateTrace, kappa: f64, mu: f64) -> Vec<f64> {
    trace
        .step_norms
        .iter()
        .enumerate()
        .map(|(k, s)| trace.energies[k + 1] + 0.25 * (kappa + mu) * s * s)
        .collect()
}
