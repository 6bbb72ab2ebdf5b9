#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = etaspec::io::parse_config(text) {
            // a config that validates must also resolve without panicking
            let _ = cfg.resolved_tolerances();
            let _ = cfg.resolved_thresholds();
            let _ = cfg.retained_states();
        }
    }
});
