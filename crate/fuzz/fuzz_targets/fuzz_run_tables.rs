//! Every delimited table the report and front commands consume.

#![no_main]

use libfuzzer_sys::fuzz_target;
use mlbsim::tables;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = tables::kpi_from_str(text);
    let _ = tables::cell_loads_from_str(text);
    let _ = tables::hm_pairs_from_str(text);
    let _ = tables::eval_log_from_str(text);
    let _ = tables::hv_from_str(text);
    let _ = tables::summary_from_str(text);
});
