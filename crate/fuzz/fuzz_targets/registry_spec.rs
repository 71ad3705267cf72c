#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let _ = gradflow::spec::parse_spec(s);
    let _ = gradflow::torus::KernelSpec::parse(s);
    let _ = gradflow::lv::LVSystem::from_registry(s, 0);
    let _ = gradflow::dc::energies::lookup(s, 2);
});
