#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(m) = etaspec::io::parse_matrix(text) {
            // canonical output must parse back to the same matrix
            let again = etaspec::io::parse_matrix(&etaspec::io::format_matrix(&m)).expect("canonical form parses");
            assert_eq!(again, m);
        }
    }
});
