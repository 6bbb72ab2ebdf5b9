#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let specs: Vec<String> = text.lines().map(str::to_string).collect();
        for s in &specs {
            let _ = etaspec::io::parse_override(s);
        }
        let _ = etaspec::io::parse_config_with("", &specs);
    }
});
