#![no_main]

use libfuzzer_sys::fuzz_target;
use wcs_core::io::{cost_to_csv, parse_cost_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cost) = parse_cost_csv(text) {
        let again = parse_cost_csv(&cost_to_csv(&cost)).expect("written cost parses");
        assert_eq!(again, cost);
    }
});
