//! Scenario files come from users; parsing plus model construction must never
//! panic, whatever the bytes.

#![no_main]

use libfuzzer_sys::fuzz_target;
use mlbsim::scenario::Scenario;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(scenario) = Scenario::from_toml_str(text) else { return };
    // Keep adversarial layouts small; the interference matrix is dense.
    if scenario.cells.len() <= 64 {
        let _ = scenario.build_model();
    }
});
