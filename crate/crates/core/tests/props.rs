use gradflow::cd::{cd_rhs, is_bell_shaped, normalize, CDState};
use gradflow::dc::energies::lookup;
use gradflow::dc::{run, Scheme, SolverConfig};
use gradflow::loja::{classify_decay, DecayModel};
use gradflow::lv::{
    build_splitting, cubic_solve_monotone, iterate_shahshahani, m_epsilon, semi_implicit_lv_step, spectral_radius, sqrt_energy,
    LVSystem,
};
use gradflow::spec::parse_spec;
use gradflow::torus::{periodize, KernelSpec, TorusGrid};
use proptest::prelude::*;

fn kernel_strategy() -> impl Strategy<Value = KernelSpec> {
    prop_oneof![
        (0.3..2.0f64).prop_map(|sigma| KernelSpec::Gaussian { sigma }),
        (0.5..3.0f64).prop_map(|alpha| KernelSpec::Exponential { alpha }),
        (0.3..2.0f64).prop_map(|width| KernelSpec::Sech2 { width }),
        (0.5..4.0f64).prop_map(|c| KernelSpec::Lorentz { c }),
    ]
}

/// Kernels sampled in real space; the Lorentz kernel multiplies by its analytic spectrum instead.
fn real_space_kernel() -> impl Strategy<Value = KernelSpec> {
    kernel_strategy().prop_filter("spectrum-defined", |k| !k.is_spectrum_defined())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn split_identity_holds(x in prop::collection::vec(-1.5..1.5f64, 3)) {
        for name in ["quadratic", "quartic", "double_well"] {
            let e = lookup(name, 3).unwrap();
            let v = e.split.validate(&[x.clone()]);
            prop_assert!(v.identity_rel_err < 1e-10, "{name}: {v:?}");
        }
    }

    #[test]
    fn dca_is_monotone(x in prop::collection::vec(-1.5..1.5f64, 2)) {
        for name in ["quadratic", "quartic", "double_well", "rosenbrock"] {
            let e = lookup(name, 2).unwrap();
            let tr = run(Scheme::Dca, &e.split, None, &x, &SolverConfig { max_iters: 200, ..Default::default() }).unwrap();
            prop_assert!(tr.is_consistent());
            prop_assert!(tr.is_monotone(1e-12), "{name}");
        }
    }

    #[test]
    fn periodized_kernels_are_even_and_positive(spec in kernel_strategy(), half in 8usize..64, l in 6.0..30.0f64) {
        let k = periodize(spec, TorusGrid::new(l, 2 * half).unwrap(), 1e-14).unwrap();
        prop_assert!(k.asymmetry() < 1e-12);
        prop_assert!(k.values.iter().all(|v| *v > 0.0));
    }

    #[test]
    fn spectral_matches_direct(spec in real_space_kernel(), half in 8usize..128, w in prop::collection::vec(0.01..3.0f64, 256)) {
        let n = 2 * half;
        let k = periodize(spec, TorusGrid::new(10.0, n).unwrap(), 1e-14).unwrap();
        let a = k.convolve(&w[..n]);
        let b = k.convolve_direct(&w[..n]);
        let d = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        prop_assert!(d < 1e-10, "{d}");
        prop_assert!(a.iter().all(|v| *v > 0.0));
    }

    #[test]
    fn rhs_is_tangent_to_the_manifold(w in prop::collection::vec(0.05..2.0f64, 64), p in 1.5..3.5f64) {
        let k = periodize(KernelSpec::Gaussian { sigma: 1.0 }, TorusGrid::new(16.0, 64).unwrap(), 1e-14).unwrap();
        let u = normalize(&k.grid, &w, p);
        let (rhs, _) = cd_rhs(&CDState::new(k.grid, u.clone(), p).unwrap(), &k).unwrap();
        let t = k.grid.integrate(&rhs.iter().zip(&u).map(|(r, v)| r * v.powf(p)).collect::<Vec<_>>());
        prop_assert!(t.abs() < 1e-10, "{t}");
    }

    #[test]
    fn cosine_bumps_are_bell_shaped(amp in 0.0..0.9f64, shift in 1usize..63) {
        let g = TorusGrid::new(10.0, 64).unwrap();
        let u: Vec<f64> = g.nodes().iter().map(|x| 1.0 + amp * (std::f64::consts::PI * x / 5.0).cos()).collect();
        prop_assert!(is_bell_shaped(&u, 1e-12));
        if amp > 0.01 {
            let moved: Vec<f64> = (0..64).map(|j| u[(j + shift) % 64]).collect();
            prop_assert!(!is_bell_shaped(&moved, 1e-12));
        }
    }

    #[test]
    fn exponential_decay_never_looks_algebraic(delta in 0.1..5.0f64, amp in 0.1..10.0f64) {
        let span = 20.0 / delta;
        let t: Vec<f64> = (0..=200).map(|k| span * k as f64 / 200.0).collect();
        let d: Vec<f64> = t.iter().map(|t| amp * (-delta * t).exp()).collect();
        let fit = classify_decay(&t, &d, 0.5, 1e-12).unwrap();
        prop_assert_eq!(fit.model, DecayModel::Exponential);
        prop_assert!((fit.rate - delta).abs() < 1e-8 * delta);
    }

    #[test]
    fn shahshahani_stays_positive_and_ascends(n in 2usize..6, seed in 0u64..1000, f0 in prop::collection::vec(0.01..2.0f64, 6)) {
        let sys = LVSystem::random_competitive(n, seed).unwrap();
        let rho = spectral_radius(&sys.b).unwrap();
        let eps = 0.1 * sys.a.iter().fold(0.0f64, |m, v| m.max(*v));
        let d_max = sys.d.iter().fold(0.0f64, |m, v| m.max(*v));
        let tau = 0.5 / (d_max * m_epsilon(&sys, rho, eps).unwrap());
        let tr = iterate_shahshahani(&sys, rho, tau, &f0[..n], 200, None).unwrap();
        prop_assert!(tr.all_positive());
        prop_assert!(tr.energy_nondecreasing(1e-13));
    }

    #[test]
    fn semi_implicit_lv_descends(n in 2usize..6, seed in 0u64..1000, tau in 0.01..20.0f64, u0 in prop::collection::vec(0.05..1.5f64, 6)) {
        let sys = LVSystem::random_competitive(n, seed).unwrap();
        let s = build_splitting(&sys.b).unwrap();
        let mut u = u0[..n].to_vec();
        let mut h = sqrt_energy(&sys, &u);
        for _ in 0..30 {
            u = semi_implicit_lv_step(&s, &sys, tau, &u).unwrap();
            let hn = sqrt_energy(&sys, &u);
            prop_assert!(hn <= h + 1e-12 * h.abs().max(1.0));
            h = hn;
        }
    }

    #[test]
    fn cubic_root_solves(a in 0.01..10.0f64, c in 0.0..10.0f64, v in 0.0..100.0f64) {
        let x = cubic_solve_monotone(a, c, v);
        prop_assert!(x >= 0.0);
        prop_assert!((a * x.powi(3) + c * x - v).abs() <= 1e-10 * v.max(1.0));
    }

    #[test]
    fn registry_names_round_trip(sigma in 0.01..100.0f64, n in 1u32..50) {
        let s = parse_spec(&format!("kern(sigma={sigma}, n={n})")).unwrap();
        prop_assert_eq!(s.name.as_str(), "kern");
        prop_assert_eq!(s.get("sigma"), Some(sigma));
        prop_assert_eq!(s.get("n"), Some(n as f64));
    }
}
