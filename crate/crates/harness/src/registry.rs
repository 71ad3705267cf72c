//! Names accepted in config files.

use crate::config::Kind;

pub fn listing() -> String {
    let mut s = String::new();
    let mut section = |title: &str, items: &[&str]| {
        s.push_str(title);
        s.push_str(":\n");
        for i in items {
            s.push_str("  ");
            s.push_str(i);
            s.push('\n');
        }
    };
    section("energies", &gradflow::dc::energies::NAMES);
    section("schemes", &["dca", "semi_implicit", "momentum (polyak)", "dual", "dual_momentum (nesterov)"]);
    section("lv_systems", &gradflow::lv::REGISTRY);
    section("lv_discrete_schemes", &["shahshahani", "dca", "semi_implicit"]);
    section("kernels", &gradflow::torus::KERNEL_REGISTRY);
    section("steppers", &["rk4", "integrating_factor"]);
    let kinds: Vec<&str> = Kind::ALL.iter().map(|k| k.as_str()).collect();
    section("kinds", &kinds);
    s
}
