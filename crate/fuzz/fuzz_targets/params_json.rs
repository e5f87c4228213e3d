#![no_main]

use libfuzzer_sys::fuzz_target;
use wcs_core::io::{params_to_json, parse_params_json};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(params) = parse_params_json(text) {
        let again = parse_params_json(&params_to_json(&params)).expect("written params parse");
        assert_eq!(again, params);
    }
});
