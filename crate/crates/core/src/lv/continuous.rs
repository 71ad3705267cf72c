use super::{check_positive, energy_e, entropy_f, lv_rhs_unchecked, sqrt_rhs_unchecked, EntropySpec, LVSystem};
use crate::error::{Error, Result};
use crate::ode::rk4_step;

/// Trajectory record. `ratio[k] = maxᵢ |fᵏ⁺¹ᵢ/fᵏᵢ − 1|`, one shorter than `states`.
#[derive(Debug, Clone, PartialEq)]
pub struct LVTrace {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub energies: Vec<f64>,
    pub entropies: Option<Vec<f64>>,
    pub min_f: Vec<f64>,
    pub ratio: Vec<f64>,
}

impl LVTrace {
    pub(crate) fn start(f0: &[f64], e0: f64, ent: Option<f64>) -> Self {
        Self {
            times: vec![0.0],
            states: vec![f0.to_vec()],
            energies: vec![e0],
            entropies: ent.map(|v| vec![v]),
            min_f: vec![f0.iter().copied().fold(f64::INFINITY, f64::min)],
            ratio: Vec::new(),
        }
    }

    pub(crate) fn push(&mut self, t: f64, f: Vec<f64>, e: f64, ent: Option<f64>) {
        let prev = self.states.last().unwrap();
        let r = f.iter().zip(prev).fold(0.0_f64, |m, (a, b)| m.max((a / b - 1.0).abs()));
        self.ratio.push(r);
        self.min_f.push(f.iter().copied().fold(f64::INFINITY, f64::min));
        self.energies.push(e);
        if let (Some(v), Some(x)) = (self.entropies.as_mut(), ent) {
            v.push(x);
        }
        self.times.push(t);
        self.states.push(f);
    }

    pub fn last(&self) -> &[f64] {
        self.states.last().unwrap()
    }

    pub fn energy_nondecreasing(&self, slack: f64) -> bool {
        self.energies.windows(2).all(|w| w[1] >= w[0] - slack)
    }

    pub fn all_positive(&self) -> bool {
        self.min_f.iter().all(|m| *m > 0.0)
    }
}

const MAX_HALVINGS: usize = 30;

/// One RK4 step of size `dt`, split into `2^k` substeps until every stage
/// result stays positive.
pub(crate) fn positive_rk4<F: Fn(&[f64]) -> Vec<f64>>(f: &F, y: &[f64], dt: f64) -> Result<Vec<f64>> {
    let mut last_bad = 0;
    for k in 0..=MAX_HALVINGS {
        let m = 1usize << k;
        let h = dt / m as f64;
        let mut cur = y.to_vec();
        let mut ok = true;
        for _ in 0..m {
            cur = rk4_step(f, &cur, h);
            if let Some(i) = cur.iter().position(|v| !(*v > 0.0) || !v.is_finite()) {
                last_bad = i;
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(cur);
        }
    }
    Err(Error::PositivityLost { index: last_bad, halvings: MAX_HALVINGS })
}

fn steps_for(dt: f64, t_end: f64) -> Result<usize> {
    if !(dt > 0.0) || !(t_end >= 0.0) {
        return Err(Error::InvalidArgument("dt must be positive and t_end nonnegative".into()));
    }
    Ok((t_end / dt).round() as usize)
}

/// RK4 for `f' = d f (a − Bf)` with positivity-preserving step halving.
pub fn integrate_continuous(
    sys: &LVSystem,
    f0: &[f64],
    dt: f64,
    t_end: f64,
    entropy: Option<&EntropySpec>,
) -> Result<LVTrace> {
    check_positive(f0)?;
    let steps = steps_for(dt, t_end)?;
    let ent = |f: &[f64]| entropy.map(|s| entropy_f(s, f)).transpose();
    let mut tr = LVTrace::start(f0, energy_e(sys, f0), ent(f0)?);
    let rhs = |f: &[f64]| lv_rhs_unchecked(sys, f);
    let mut f = f0.to_vec();
    for k in 1..=steps {
        f = positive_rk4(&rhs, &f, dt)?;
        tr.push(k as f64 * dt, f.clone(), energy_e(sys, &f), ent(&f)?);
    }
    Ok(tr)
}

/// RK4 for the square-root system. States are `u`; energies are `E(u²)`.
pub fn integrate_sqrt(sys: &LVSystem, u0: &[f64], dt: f64, t_end: f64) -> Result<LVTrace> {
    check_positive(u0)?;
    let steps = steps_for(dt, t_end)?;
    let sq = |u: &[f64]| u.iter().map(|x| x * x).collect::<Vec<_>>();
    let mut tr = LVTrace::start(u0, energy_e(sys, &sq(u0)), None);
    let rhs = |u: &[f64]| sqrt_rhs_unchecked(sys, u);
    let mut u = u0.to_vec();
    for k in 1..=steps {
        u = positive_rk4(&rhs, &u, dt)?;
        tr.push(k as f64 * dt, u.clone(), energy_e(sys, &sq(&u)), None);
    }
    Ok(tr)
}
