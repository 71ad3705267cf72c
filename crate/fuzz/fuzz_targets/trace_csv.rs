#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(tr) = gradflow_harness::parse_trace(data) {
        let _ = gradflow_harness::trace::diagnose_trace(&tr, &Default::default());
    }
});
