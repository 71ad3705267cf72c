//! Classical RK4 for autonomous systems.

pub fn rk4_step<F>(f: &F, y: &[f64], h: f64) -> Vec<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let k1 = f(y);
    let y2: Vec<f64> = y.iter().zip(&k1).map(|(a, k)| a + 0.5 * h * k).collect();
    let k2 = f(&y2);
    let y3: Vec<f64> = y.iter().zip(&k2).map(|(a, k)| a + 0.5 * h * k).collect();
    let k3 = f(&y3);
    let y4: Vec<f64> = y.iter().zip(&k3).map(|(a, k)| a + h * k).collect();
    let k4 = f(&y4);
    (0..y.len())
        .map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

/// Fixed-step RK4 from 0 to `t_end`; the last step is shortened to land on `t_end`.
/// Returns the sample times and states, including the initial one.
pub fn integrate<F>(f: &F, y0: &[f64], dt: f64, t_end: f64) -> (Vec<f64>, Vec<Vec<f64>>)
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let mut ts = vec![0.0];
    let mut ys = vec![y0.to_vec()];
    let steps = (t_end / dt).ceil().max(0.0) as usize;
    let mut t = 0.0;
    for k in 0..steps {
        let h = if k + 1 == steps { t_end - t } else { dt };
        if h <= 0.0 {
            break;
        }
        let y = rk4_step(f, ys.last().unwrap(), h);
        t = if k + 1 == steps { t_end } else { t + h };
        ts.push(t);
        ys.push(y);
    }
    (ts, ys)
}
