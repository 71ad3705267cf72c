use gradflow::lv::*;
use gradflow::Error;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn third() -> Vec<f64> {
    vec![1.0 / 3.0, 1.0 / 3.0]
}

#[test]
fn rhs_examples() {
    assert_eq!(lv_rhs(&LVSystem::logistic(), &[1.0]).unwrap(), vec![0.0]);
    let c2 = LVSystem::competitive2();
    let r = lv_rhs(&c2, &third()).unwrap();
    assert!(r.iter().all(|v| v.abs() < 1e-15));
    assert_eq!(lv_rhs(&c2, &[1.0, 1.0]).unwrap(), vec![-2.0, -2.0]);
    assert!(matches!(lv_rhs(&c2, &[0.0, 1.0]), Err(Error::NonPositiveState { index: 0, .. })));
}

#[test]
fn energy_and_entropy_values() {
    assert!(close(energy_e(&LVSystem::logistic(), &[1.0]), 0.5, 1e-15));
    let c2 = LVSystem::competitive2();
    assert!(close(energy_e(&c2, &third()), 1.0 / 3.0, 1e-15));
    let spec = EntropySpec::continuous(&c2, third()).unwrap();
    assert!(entropy_f(&spec, &third()).unwrap().abs() < 1e-15);
    // x − 1 − ln x ≥ 0, summed with weight f̃
    for f in [[0.1f64, 0.7], [2.0, 0.01], [0.5, 0.5]] {
        let want: f64 = f.iter().map(|x| (1.0 / 3.0) * (3.0 * x - 1.0 - (3.0 * x).ln())).sum();
        assert!(close(entropy_f(&spec, &f).unwrap(), want, 1e-14));
        assert!(want >= 0.0);
    }
}

#[test]
fn logistic_matches_closed_form() {
    let tr = integrate_continuous(&LVSystem::logistic(), &[0.1], 0.01, 30.0, None).unwrap();
    let mut worst: f64 = 0.0;
    for (t, f) in tr.times.iter().zip(&tr.states) {
        let exact = 1.0 / (1.0 + 9.0 * (-t).exp());
        worst = worst.max((f[0] - exact).abs());
    }
    assert!(worst < 1e-6, "{worst}");
    assert!(close(*tr.times.last().unwrap(), 30.0, 1e-9));
    assert!(tr.energy_nondecreasing(0.0));
}

#[test]
fn competitive_flow_converges_with_monotone_energy() {
    let c2 = LVSystem::competitive2();
    let spec = EntropySpec::continuous(&c2, third()).unwrap();
    let tr = integrate_continuous(&c2, &[0.9, 0.1], 0.01, 80.0, Some(&spec)).unwrap();
    let f = tr.last();
    assert!(close(f[0], 1.0 / 3.0, 1e-8) && close(f[1], 1.0 / 3.0, 1e-8), "{f:?}");
    assert!(tr.energy_nondecreasing(1e-14));
    assert!(tr.all_positive());
    let ent = tr.entropies.as_ref().unwrap();
    assert!(ent.windows(2).all(|w| w[1] <= w[0] + 1e-14));
    assert!(*ent.last().unwrap() < 1e-12);
}

#[test]
fn equilibrium_start_stays_put() {
    let tr = integrate_continuous(&LVSystem::competitive2(), &third(), 0.05, 10.0, None).unwrap();
    for s in &tr.states {
        assert!(close(s[0], 1.0 / 3.0, 1e-14) && close(s[1], 1.0 / 3.0, 1e-14));
    }
}

#[test]
fn sqrt_flow_tracks_square_root_of_f() {
    for sys in [LVSystem::competitive2(), LVSystem::extinction2(), LVSystem::random_competitive(4, 7).unwrap()] {
        let f0: Vec<f64> = (0..sys.n()).map(|i| 0.2 + 0.15 * i as f64).collect();
        let u0: Vec<f64> = f0.iter().map(|x| x.sqrt()).collect();
        let a = integrate_continuous(&sys, &f0, 0.005, 20.0, None).unwrap();
        let b = integrate_sqrt(&sys, &u0, 0.005, 20.0).unwrap();
        let mut worst: f64 = 0.0;
        for (f, u) in a.states.iter().zip(&b.states) {
            for (fi, ui) in f.iter().zip(u) {
                worst = worst.max((fi - ui * ui).abs());
            }
        }
        assert!(worst < 1e-8, "{worst}");
    }
}

#[test]
fn sqrt_gradient_matches_finite_differences() {
    let sys = LVSystem::random_competitive(3, 11).unwrap();
    let u = [0.4, 0.9, 0.6];
    let g = sqrt_energy_grad(&sys, &u);
    let h = 1e-6;
    for i in 0..3 {
        let mut up = u;
        let mut dn = u;
        up[i] += h;
        dn[i] -= h;
        let fd = (sqrt_energy(&sys, &up) - sqrt_energy(&sys, &dn)) / (2.0 * h);
        assert!(close(g[i], fd, 1e-8), "{i}: {} vs {fd}", g[i]);
    }
    // u' = −diag(d)∇H
    let r = sqrt_rhs(&sys, &u).unwrap();
    for i in 0..3 {
        assert!(close(r[i], -sys.d[i] * g[i], 1e-15));
    }
    let ue = [1.0 / 3f64.sqrt(); 2];
    assert!(sqrt_rhs(&LVSystem::competitive2(), &ue).unwrap().iter().all(|v| v.abs() < 1e-15));
}

#[test]
fn shahshahani_single_step_by_hand() {
    let f = discrete_step_shahshahani(&LVSystem::logistic(), 1.0, 0.1, &[0.5]).unwrap();
    assert!(close(f[0], 0.5 * 1.1 / 1.05, 1e-15));
    let c2 = LVSystem::competitive2();
    let g = discrete_step_shahshahani(&c2, 3.0, 0.1, &third()).unwrap();
    assert!(close(g[0], 1.0 / 3.0, 1e-15) && close(g[1], 1.0 / 3.0, 1e-15));
}

#[test]
fn shahshahani_rejections() {
    let lg = LVSystem::logistic();
    // bound 1/M_ε = 1/3.1 for a = B = λ = 1, ε = 0.1
    assert!(matches!(discrete_step_shahshahani(&lg, 1.0, 0.5, &[0.5]), Err(Error::TauTooLarge { .. })));
    assert!(discrete_step_shahshahani(&lg, 1.0, 0.32, &[0.5]).is_ok());
    assert!(close(m_epsilon(&lg, 1.0, 0.1).unwrap(), 3.1, 1e-12));
    assert!(matches!(
        discrete_step_shahshahani(&LVSystem::competitive2(), 2.0, 0.1, &[0.5, 0.5]),
        Err(Error::InvalidArgument(_))
    ));
}

#[test]
fn shahshahani_converges_and_satisfies_properties() {
    let c2 = LVSystem::competitive2();
    let spec = EntropySpec::discrete(&c2, third(), 3.0, 0.1).unwrap();
    let tr = iterate_shahshahani(&c2, 3.0, 0.1, &[0.9, 0.1], 3000, Some(&spec)).unwrap();
    let f = tr.last();
    assert!(close(f[0], 1.0 / 3.0, 1e-8) && close(f[1], 1.0 / 3.0, 1e-8), "{f:?}");
    let worst = tr.energies.windows(2).map(|w| w[0] - w[1]).fold(f64::MIN, f64::max);
    assert!(worst <= 1e-15, "{worst}");
    let rep = check_discrete_properties(&c2, 3.0, 0.1, 0.1, &tr).unwrap();
    assert!(rep.all_hold(), "{rep:?}");
    let trap = entropy_trap_monitor(&c2, &tr, &spec).unwrap();
    assert!(trap.k_set.is_empty() && trap.trapped);
}

#[test]
fn extinction_limit_is_entropy_trapped() {
    let sys = LVSystem::extinction2();
    let rho = spectral_radius(&sys.b).unwrap();
    let spec = EntropySpec::discrete(&sys, vec![1.0, 0.0], rho, 0.1).unwrap();
    let tr = iterate_shahshahani(&sys, rho, 0.1, &[0.5, 0.5], 4000, Some(&spec)).unwrap();
    let f = tr.last();
    assert!(close(f[0], 1.0, 1e-6) && f[1] < 1e-6, "{f:?}");
    let rep = entropy_trap_monitor(&sys, &tr, &spec).unwrap();
    assert_eq!(rep.k_set, vec![1]);
    assert!(close(rep.m, 0.3, 1e-12));
    assert!(rep.trapped, "{rep:?}");
    assert!(*rep.f.last().unwrap() < 1e-5);
}

#[test]
fn splitting_examples() {
    let s = build_splitting(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
    assert!(close(s.lambda, 3.0, 1e-10) && close(s.beta, 1.0, 0.0));
    assert!(close(s.bplus[0][0], 4.0, 1e-10) && close(s.bplus[0][1], 1.0, 1e-10));
    assert!(close(s.bminus[0][0], 2.0, 1e-10) && close(s.bminus[0][1], 0.0, 1e-10));

    let s = build_splitting(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
    assert!(close(s.lambda, 1.0, 1e-12) && s.beta == 0.0);

    let s = build_splitting(&[vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap();
    assert!(close(s.lambda, 2.0, 1e-10) && s.beta == 0.0);
    for row in &s.bminus {
        assert!(row.iter().all(|v| close(*v, 1.0, 1e-10)));
    }
    assert!(matches!(build_splitting(&[vec![1.0, 0.5], vec![0.4, 1.0]]), Err(Error::NotSymmetric(_))));
}

#[test]
fn cubic_solves() {
    assert!(close(cubic_solve_monotone(1.0, 1.0, 2.0), 1.0, 1e-14));
    assert!(close(cubic_solve_monotone(1.0, 0.0, 8.0), 2.0, 1e-14));
    assert_eq!(cubic_solve_monotone(2.0, 1.0, 0.0), 0.0);
    // bisection oracle
    let g = |x: f64| 3.0 * x * x * x + 0.7 * x - 5.0;
    let (mut lo, mut hi) = (0.0, 5.0);
    for _ in 0..200 {
        let m = 0.5 * (lo + hi);
        if g(m) > 0.0 {
            hi = m
        } else {
            lo = m
        }
    }
    assert!(close(cubic_solve_monotone(3.0, 0.7, 5.0), lo, 1e-13));
    assert!(close(cubic_solve_odd(3.0, 0.7, -5.0), -lo, 1e-13));
}

#[test]
fn coupled_solve_satisfies_its_equations() {
    let v = [0.3, 1.2, 0.05];
    let (x, s) = solve_s_coupled(1.5, 0.2, 0.8, &v, 0.0).unwrap();
    assert!(close(s, x.iter().map(|a| a * a).sum(), 1e-11));
    for i in 0..3 {
        assert!(close(1.5 * x[i].powi(3) + (0.2 + 0.8 * s) * x[i], v[i], 1e-11));
    }
}

#[test]
fn dca_without_coupling_is_a_cube_root() {
    let sys = LVSystem::new(vec![1.0, 0.5], vec![vec![1.0, -0.5], vec![-0.5, 1.0]], vec![1.0, 1.0]).unwrap();
    let s = build_splitting(&sys.b).unwrap();
    assert_eq!(s.beta, 0.0);
    let u = [0.7, 0.4];
    let f = [0.49, 0.16];
    let x = dca_lv_step(&s, &sys, &u).unwrap();
    for i in 0..2 {
        let bm = s.bminus[i][0] * f[0] + s.bminus[i][1] * f[1];
        let want = (u[i] * (sys.a[i] + bm) / s.lambda).cbrt();
        assert!(close(x[i], want, 1e-13));
    }
}

#[test]
fn dca_reaches_interior_equilibrium() {
    let c2 = LVSystem::competitive2();
    let s = build_splitting(&c2.b).unwrap();
    let mut u = vec![0.9, 0.2];
    let mut h = sqrt_energy(&c2, &u);
    for _ in 0..400 {
        u = dca_lv_step(&s, &c2, &u).unwrap();
        let hn = sqrt_energy(&c2, &u);
        assert!(hn <= h + 1e-15);
        h = hn;
    }
    assert!(u.iter().all(|x| close(x * x, 1.0 / 3.0, 1e-8)), "{u:?}");
}

#[test]
fn semi_implicit_is_unconditionally_monotone() {
    let sys = LVSystem::random_competitive(5, 3).unwrap();
    let s = build_splitting(&sys.b).unwrap();
    for tau in [0.01, 0.1, 1.0, 10.0] {
        let mut u = vec![0.3, 1.4, 0.8, 0.05, 1.0];
        let mut h = sqrt_energy(&sys, &u);
        for _ in 0..200 {
            u = semi_implicit_lv_step(&s, &sys, tau, &u).unwrap();
            assert!(u.iter().all(|x| *x > 0.0));
            let hn = sqrt_energy(&sys, &u);
            assert!(hn <= h + 1e-13, "tau {tau}: {hn} > {h}");
            h = hn;
        }
    }
}

#[test]
fn regularized_rhs_values() {
    let zero = |f: &[f64]| vec![0.0; f.len()];
    assert_eq!(reg_lv_rhs(&zero, 1.0, 1.0, &[0.5, 2.0]).unwrap(), vec![0.0, 0.0]);
    let one = |f: &[f64]| vec![1.0; f.len()];
    assert!(close(reg_lv_rhs(&one, 1.0, 1.0, &[1.0]).unwrap()[0], -0.5, 1e-15));
    let c2 = LVSystem::competitive2();
    let gh = |f: &[f64]| c2.fitness(f).iter().map(|r| -r).collect::<Vec<_>>();
    assert!(reg_lv_rhs(&gh, 0.3, 2.0, &third()).unwrap().iter().all(|v| v.abs() < 1e-15));
}

#[test]
fn desingularized_rhs_is_the_chain_rule_image() {
    let c2 = LVSystem::competitive2();
    let (mu, nu) = (0.4, 1.7);
    let gh = |f: &[f64]| c2.fitness(f).iter().map(|r| -r).collect::<Vec<_>>();
    let ghat = |u: &[f64]| {
        let f: Vec<f64> = u.iter().map(|x| x * x).collect();
        gh(&f).iter().zip(u).map(|(g, x)| 2.0 * x * g).collect::<Vec<_>>()
    };
    for u in [[0.3, 0.8], [1.1, 0.2], [0.5, 0.5]] {
        let f: Vec<f64> = u.iter().map(|x| x * x).collect();
        let df = reg_lv_rhs(&gh, mu, nu, &f).unwrap();
        let du = reg_lv_desing_rhs(&ghat, 4.0 * mu, 4.0 * nu, &u).unwrap();
        for i in 0..2 {
            assert!(close(du[i], df[i] / (2.0 * u[i]), 1e-14));
        }
    }
}

#[test]
fn mirror_steps() {
    let c2 = LVSystem::competitive2();
    let gh = |u: &[f64]| sqrt_energy_grad(&c2, u);
    let zero = |u: &[f64]| vec![0.0; u.len()];
    let u = [0.6, 0.9];
    let id = reg_lv_mirror_step(&zero, 1.0, 2.0, 0.1, &u, MirrorMode::Euler).unwrap();
    assert!(id.iter().zip(&u).all(|(a, b)| close(*a, *b, 1e-14)));

    let x = reg_lv_mirror_step(&gh, 1.0, 0.0, 0.1, &u, MirrorMode::Euler).unwrap();
    let g = gh(&u);
    for i in 0..2 {
        assert!(close(x[i], u[i] - 0.1 * g[i], 1e-15));
    }

    let s = build_splitting(&c2.b).unwrap();
    let mut v = vec![0.9, 0.2];
    let mut h = sqrt_energy(&c2, &v);
    for _ in 0..2000 {
        v = reg_lv_mirror_step(&gh, 1.0, 1.0, 0.2, &v, MirrorMode::SemiImplicit { split: &s, sys: &c2 }).unwrap();
        let hn = sqrt_energy(&c2, &v);
        assert!(hn <= h + 1e-14);
        h = hn;
    }
    assert!(v.iter().all(|x| close(x * x, 1.0 / 3.0, 1e-8)), "{v:?}");
}

#[test]
fn mutation_flat_equilibrium_is_stationary() {
    let g = MutationGrid::new(32, |_| 1.0, |_, _| 1.0, 0.1).unwrap();
    let (u, _) = g.step(0.01, &vec![1.0; 32]).unwrap();
    assert!(u.iter().all(|v| close(*v, 1.0, 1e-14)));
}

#[test]
fn mutation_perturbation_relaxes() {
    let g = MutationGrid::new(32, |_| 1.0, |_, _| 1.0, 0.1).unwrap();
    let mut u: Vec<f64> = g.x.iter().map(|x| 1.0 + 0.2 * (std::f64::consts::PI * x).cos()).collect();
    let mut h = g.energy(&u);
    for _ in 0..3000 {
        let (v, info) = g.step(0.01, &u).unwrap();
        assert!(0.01 < info.dt_threshold);
        let hn = g.energy(&v);
        assert!(hn <= h + 1e-15, "{hn} > {h}");
        h = hn;
        u = v;
    }
    assert!(u.iter().all(|v| close(*v, 1.0, 1e-6)));
}

#[test]
fn mutation_without_diffusion_is_node_system_euler() {
    let g = MutationGrid::new(10, |x| 1.0 + x, |x, y| 1.0 + x * y, 0.0).unwrap();
    let sys = g.node_system().unwrap();
    let u: Vec<f64> = (0..10).map(|j| 0.5 + 0.05 * j as f64).collect();
    let (v, _) = g.step(0.05, &u).unwrap();
    let r = sqrt_rhs(&sys, &u).unwrap();
    for j in 0..10 {
        assert!(close(v[j], u[j] + 0.05 * r[j], 1e-15));
    }
}

#[test]
fn registry_names() {
    assert_eq!(LVSystem::from_registry("logistic", 0).unwrap(), LVSystem::logistic());
    let a = LVSystem::from_registry("random_competitive(n=6, seed=9)", 0).unwrap();
    let b = LVSystem::random_competitive(6, 9).unwrap();
    assert_eq!(a, b);
    assert!(a.is_competitive());
    assert!(LVSystem::from_registry("nope", 0).is_err());
    assert!(LVSystem::from_registry("random_competitive(n=2.5)", 0).is_err());
    assert!(LVSystem::from_registry("competitive2(x=1)", 0).is_err());
}
