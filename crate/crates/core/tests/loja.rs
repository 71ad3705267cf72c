use gradflow::dc::energies::lookup;
use gradflow::dc::*;
use gradflow::loja::*;
use gradflow::Error;

fn known(h: f64) -> FitOptions {
    FitOptions { h_limit: HLimit::Known(h), ..FitOptions::default() }
}

fn flow_1d(e: fn(f64) -> f64, g: fn(f64) -> f64, x0: f64, dt: f64, t_end: f64) -> FlowTrace {
    gradient_flow(move |u: &[f64]| e(u[0]), move |u: &[f64]| vec![g(u[0])], &[x0], dt, t_end, 10).unwrap()
}

#[test]
fn quadratic_flow_exponent_and_constant() {
    let tr = flow_1d(|x| 0.5 * x * x, |x| x, 1.0, 0.01, 10.0);
    let fit = estimate_exponent(&tr.energies, &tr.grad_norms, &known(0.0)).unwrap();
    assert!((fit.theta - 0.5).abs() <= 0.02, "{fit:?}");
    assert!((fit.c / 2f64.sqrt() - 1.0).abs() <= 0.05, "{fit:?}");
    assert_eq!(fit.model, DecayModel::Exponential);
    assert!(fit.fit_r2 >= 0.0 && fit.fit_r2 <= 1.0);
    // ‖∇E‖ = √2|E|^{1/2} exactly
    let env = envelope_constant(&tr.energies, &tr.grad_norms, 0.0, 0.5);
    assert!((env - 2f64.sqrt()).abs() < 1e-12);
}

#[test]
fn quadratic_flow_with_estimated_limit() {
    let tr = flow_1d(|x| 0.5 * x * x, |x| x, 1.0, 0.01, 30.0);
    for h in [HLimit::Last, HLimit::Aitken] {
        let fit = estimate_exponent(&tr.energies, &tr.grad_norms, &FitOptions { h_limit: h, ..FitOptions::default() })
            .unwrap();
        assert!((fit.theta - 0.5).abs() <= 0.05, "{h:?}: {fit:?}");
    }
}

#[test]
fn quartic_flow_exponent() {
    let tr = flow_1d(|x| 0.25 * x.powi(4), |x| x.powi(3), 1.0, 0.01, 2000.0);
    let fit = estimate_exponent(&tr.energies, &tr.grad_norms, &known(0.0)).unwrap();
    assert!((fit.theta - 0.25).abs() <= 0.05, "{fit:?}");
    assert_eq!(fit.model, DecayModel::Algebraic);
    // ‖∇E‖ = 4^{3/4}|E|^{3/4}
    assert!((fit.c - 4f64.powf(0.75)).abs() < 1e-6 * fit.c, "{fit:?}");
}

#[test]
fn registry_flows_recover_analytic_exponents() {
    for name in ["quadratic", "quartic", "double_well"] {
        let e = lookup(name, 1).unwrap();
        let s = e.split.clone();
        let s2 = e.split.clone();
        let t_end = match name {
            "quartic" => 2000.0,
            "double_well" => 5.0,
            _ => 10.0,
        };
        let tr = gradient_flow(move |u: &[f64]| s.h(u), move |u: &[f64]| s2.grad(u), &e.default_u0, 0.01, t_end, 10)
            .unwrap();
        let h = e.critical_value.unwrap();
        let fit = estimate_exponent(&tr.energies, &tr.grad_norms, &known(h)).unwrap();
        let want = e.theta.unwrap();
        assert!(fit.theta > 0.0 && fit.theta <= 0.5);
        assert!((fit.theta - want).abs() <= 0.05, "{name}: {fit:?}");
    }
}

#[test]
fn degenerate_inputs() {
    let flat = vec![1.0; 20];
    let g = vec![0.0; 20];
    assert!(matches!(estimate_exponent(&flat, &g, &FitOptions::default()), Err(Error::InsufficientData(_))));
    assert!(matches!(estimate_exponent(&flat[..5], &g[..5], &FitOptions::default()), Err(Error::InsufficientData(_))));
    let wobble: Vec<f64> = (0..20).map(|k| 1.0 / (k + 1) as f64 + if k % 2 == 0 { 0.2 } else { 0.0 }).collect();
    let gn = vec![1.0; 20];
    assert!(matches!(estimate_exponent(&wobble, &gn, &FitOptions::default()), Err(Error::NonMonotoneTail { .. })));
}

#[test]
fn exponential_decay_is_classified() {
    let t: Vec<f64> = (0..=200).map(|k| 0.1 * k as f64).collect();
    let d: Vec<f64> = t.iter().map(|t| (-t).exp()).collect();
    let fit = classify_decay(&t, &d, 0.5, 1e-12).unwrap();
    assert_eq!(fit.model, DecayModel::Exponential);
    assert!((fit.rate - 1.0).abs() < 1e-9);
    assert_eq!(fit.matches_theta(0.5, 0.1), None);
}

#[test]
fn cubic_decay_is_algebraic() {
    // x' = −x³, x(0) = 1
    let t: Vec<f64> = (0..=400).map(|k| 0.5 * k as f64).collect();
    let d: Vec<f64> = t.iter().map(|t| (1.0 + 2.0 * t).powf(-0.5)).collect();
    let fit = classify_decay(&t, &d, 0.5, 1e-12).unwrap();
    assert_eq!(fit.model, DecayModel::Algebraic);
    assert!((fit.rate - 0.5).abs() < 0.01, "{fit:?}");
    assert!((algebraic_exponent(0.25) - 0.5).abs() < 1e-15);
    assert_eq!(fit.matches_theta(0.25, 0.05), Some(true));
}

#[test]
fn dca_quadratic_rate_matches_corollary() {
    let e = lookup("quadratic", 1).unwrap();
    let tr = run(Scheme::Dca, &e.split, None, &[1.0], &SolverConfig::default()).unwrap();
    let times: Vec<f64> = (0..tr.len()).map(|k| k as f64).collect();
    let d = distances_to(&tr.states, &[0.0]);
    let fit = classify_decay(&times, &d, 0.5, 1e-14).unwrap();
    assert_eq!(fit.model, DecayModel::Exponential);
    // a = σγc² = 0.75 · 0.5 · 2, so Hₙ₊₁ ≤ (1 − a)Hₙ and ‖uₙ‖ shrinks by √(1 − a) at least
    let a = 0.75 * 0.5 * 2.0;
    let bound = (1.0f64 - a).sqrt();
    assert!((-fit.rate).exp() <= bound + 1e-9, "{fit:?}");
}

#[test]
fn tail_bound_on_quadratic_dca() {
    let e = lookup("quadratic", 1).unwrap();
    let tr = run(Scheme::Dca, &e.split, None, &[1.0], &SolverConfig::default()).unwrap();
    let rep = l1_tail_bound_check(&tr.step_norms, &tr.energies, 0.0, 2f64.sqrt(), 0.75, 0.5);
    assert!(rep.holds && rep.theta_valid, "{rep:?}");
    // direct summation: the tail sum from n is ‖uₙ‖ up to the truncated remainder
    let direct: f64 = tr.step_norms.iter().sum();
    assert!((rep.margins[0] - (1.0 / (2f64.sqrt() * 0.75 * 0.5) * 0.5f64.sqrt() - direct)).abs() < 1e-12);

    let single = l1_tail_bound_check(&[], &[0.0], 0.0, 1.0, 0.5, 0.5);
    assert_eq!(single.margins, vec![0.0]);
    assert!(single.holds);

    let bad = l1_tail_bound_check(&tr.step_norms, &tr.energies, 0.0, 2f64.sqrt(), 0.75, 0.9);
    assert!(!bad.theta_valid && !bad.holds);
}

#[test]
fn angle_rate_profiles() {
    let e = lookup("quadratic", 2).unwrap();
    let states: Vec<Vec<f64>> = (0..20).map(|k| vec![0.9f64.powi(k), -2.0 * 0.9f64.powi(k)]).collect();
    let euler = IterateTrace::from_states(&e.split, states, StopReason::MaxIters);
    for ar in angle_rate_profile(&euler) {
        assert!((ar.gamma.unwrap() - 0.1).abs() < 1e-14);
        assert!((ar.sigma.unwrap() - 0.95).abs() < 1e-12);
    }

    let dca = run(Scheme::Dca, &e.split, None, &[1.0, 3.0], &SolverConfig::default()).unwrap();
    for ar in angle_rate_profile(&dca) {
        assert!((ar.gamma.unwrap() - 0.5).abs() < 1e-14);
    }

    let still = IterateTrace::from_states(&e.split, vec![vec![0.0, 0.0]; 3], StopReason::StepTol);
    for ar in angle_rate_profile(&still) {
        assert_eq!(ar.sigma, None);
        assert_eq!(ar.gamma, None);
    }
}
