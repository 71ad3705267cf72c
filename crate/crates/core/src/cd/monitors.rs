use super::CDTrace;
use crate::torus::PeriodizedKernel;

#[derive(Debug, Clone, PartialEq)]
pub struct MonitorReport {
    /// `E(u₀) > 0`; without it the F monitor is disarmed and reported as passing.
    pub energy_positive: bool,
    pub f_nondecreasing: bool,
    pub f_worst_drop: f64,
    pub lp1_monotone: bool,
    pub lp1_final_error: f64,
    pub lp1_to_one: bool,
    pub e_converges: bool,
    /// Checked only when `‖u₀‖_{p+1} ≤ 1`.
    pub e_nondecreasing: Option<bool>,
    /// `(Iₙ₊₁ − Iₙ)(1 − Iₙ) ≥ −1e−8` with `I = ∫u^{p+1}`.
    pub manifold_attraction: bool,
}

impl MonitorReport {
    pub fn all_pass(&self) -> bool {
        self.f_nondecreasing
            && self.lp1_monotone
            && self.lp1_to_one
            && self.e_converges
            && self.e_nondecreasing.unwrap_or(true)
            && self.manifold_attraction
    }
}

/// Per-step slack for F, tolerance on `|‖u‖_{p+1} − 1|` at the end, relative spread
/// allowed in E over the last stretch of the run.
pub fn functional_monitors(trace: &CDTrace, f_slack: f64, lp1_tol: f64, e_rel_tol: f64) -> MonitorReport {
    let r = &trace.records;
    let energy_positive = r[0].e > 0.0;
    let mut f_worst_drop = 0.0f64;
    for w in r.windows(2) {
        f_worst_drop = f_worst_drop.max(w[0].f - w[1].f);
    }
    let f_nondecreasing = !energy_positive || f_worst_drop <= f_slack;

    // RK4 leaves the manifold by O(dt⁵) during fast transients.
    let mono_slack = lp1_tol;
    let lp1_monotone = r.windows(2).all(|w| {
        let (a, b) = (w[0].lp1_norm - 1.0, w[1].lp1_norm - 1.0);
        b.abs() <= a.abs() + mono_slack && (a * b >= 0.0 || b.abs() <= mono_slack)
    });
    let lp1_final_error = (trace.last().lp1_norm - 1.0).abs();

    let tail = (r.len() / 20).max(10).min(r.len());
    let tail_e: Vec<f64> = r[r.len() - tail..].iter().map(|x| x.e).collect();
    let lo = tail_e.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = tail_e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e_last = trace.last().e;
    let e_converges = e_last > 0.0 && (hi - lo) <= e_rel_tol * e_last;

    let e_nondecreasing = (r[0].lp1_norm <= 1.0 + 1e-12).then(|| r.windows(2).all(|w| w[1].e >= w[0].e - f_slack));

    let p1 = trace.p + 1.0;
    let manifold_attraction = r.windows(2).all(|w| {
        let (i0, i1) = (w[0].lp1_norm.powf(p1), w[1].lp1_norm.powf(p1));
        (i1 - i0) * (1.0 - i0) >= -1e-8
    });

    MonitorReport {
        energy_positive,
        f_nondecreasing,
        f_worst_drop,
        lp1_monotone,
        lp1_final_error,
        lp1_to_one: lp1_final_error <= lp1_tol,
        e_converges,
        e_nondecreasing,
        manifold_attraction,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsReport {
    /// `max{‖u₀‖∞, ‖K‖_{L^{p+1}}/c(0)}`.
    pub m_upper: f64,
    /// `(1−ε)k/(M·‖K‖_{L^{(p+1)/2}})`.
    pub m_lower: f64,
    pub k_min: f64,
    pub sup_u: f64,
    /// `‖u₀‖_{p+1} ≤ 1`, the hypothesis behind the explicit upper bound.
    pub applicable: bool,
    pub upper_ok: bool,
    /// First time at which `∫u^{p+1} ≥ 1 − ε`.
    pub transient_end: Option<f64>,
    pub lower_violations: usize,
}

impl BoundsReport {
    pub fn holds(&self) -> bool {
        (!self.applicable || self.upper_ok) && self.lower_violations == 0
    }
}

/// Check the explicit upper bound and, after the transient, the lower bound. Below `m`
/// the comparison ODE `v' = (1−ε)k/M − c̄v` allows `min u ≥ m + (u_min(t₀) − m)e^{−c̄(t−t₀)}`.
pub fn pointwise_bounds(trace: &CDTrace, kernel: &PeriodizedKernel, eps: f64) -> BoundsReport {
    let r = &trace.records;
    let p = trace.p;
    let r0 = &r[0];
    let k_min = kernel.min_value();
    let m_upper = r0.u_max.max(kernel.lq_norm(p + 1.0) / r0.c);
    let k_half = kernel.lq_norm(0.5 * (p + 1.0));
    let m_lower = (1.0 - eps) * k_min / (m_upper * k_half);
    let sup_u = r.iter().map(|x| x.u_max).fold(f64::NEG_INFINITY, f64::max);
    let applicable = r0.lp1_norm <= 1.0 + 1e-12;
    let upper_ok = sup_u <= m_upper * (1.0 + 1e-9);

    let start = r.iter().position(|x| x.lp1_norm.powf(p + 1.0) >= 1.0 - eps);
    let mut lower_violations = 0;
    if let Some(i0) = start {
        let max_norm = r[i0..].iter().map(|x| x.lp1_norm).fold(1.0f64, f64::max);
        let c_bar = k_half * max_norm.powf(2.0 * p);
        let m = (1.0 - eps) * k_min / (m_upper.max(sup_u) * c_bar);
        let (t0, v0) = (r[i0].t, r[i0].u_min);
        for x in &r[i0..] {
            let lower = m + (v0 - m).min(0.0) * (-c_bar * (x.t - t0)).exp();
            if x.u_min < lower * (1.0 - 1e-9) {
                lower_violations += 1;
            }
        }
    }
    BoundsReport {
        m_upper,
        m_lower,
        k_min,
        sup_u,
        applicable,
        upper_ok,
        transient_end: start.map(|i| r[i].t),
        lower_violations,
    }
}
