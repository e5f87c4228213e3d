#![no_main]

use libfuzzer_sys::fuzz_target;
use wcs_core::io::{parse_trace_jsonl, trace_to_jsonl};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(trace) = parse_trace_jsonl(text) {
        // NaN fields would break equality, so compare the re-serialized text.
        let written = trace_to_jsonl(&trace);
        let again = parse_trace_jsonl(&written).expect("written trace parses");
        assert_eq!(trace_to_jsonl(&again), written);
    }
});
