//! Archive and front tables are re-read by the front command, so anything
//! that parses must also re-serialize and parse back to the same row count.

#![no_main]

use libfuzzer_sys::fuzz_target;
use mlbsim::tables;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(rows) = tables::archive_from_str(text) {
        let out = tables::archive_to_string(&rows).unwrap();
        assert_eq!(tables::archive_from_str(&out).unwrap().len(), rows.len());
    }
    if let Ok(rows) = tables::front_from_str(text) {
        let out = tables::front_to_string(&rows).unwrap();
        assert_eq!(tables::front_from_str(&out).unwrap().len(), rows.len());
    }
});
