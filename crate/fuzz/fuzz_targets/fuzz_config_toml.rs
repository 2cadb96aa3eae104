//! Run configuration parsers for both CLI entry points.

#![no_main]

use libfuzzer_sys::fuzz_target;
use mlbsim::config::{CampaignSpec, SimulateSpec};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = SimulateSpec::from_toml_str(text);
    let _ = CampaignSpec::from_toml_str(text);
});
