#![no_main]

use libfuzzer_sys::fuzz_target;
use wcs_core::io::{parse_partial_permutation_json, partial_permutation_to_json};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = parse_partial_permutation_json(text) {
        assert_eq!(p.pairs().count(), p.size());
        let again = parse_partial_permutation_json(&partial_permutation_to_json(&p)).expect("written assignment parses");
        assert_eq!(again, p);
    }
});
