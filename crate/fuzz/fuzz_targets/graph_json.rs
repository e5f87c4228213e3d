#![no_main]

use libfuzzer_sys::fuzz_target;
use wcs_core::io::{graph_to_json, parse_graph_json};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(graph) = parse_graph_json(text) {
        let again = parse_graph_json(&graph_to_json(&graph)).expect("written graph parses");
        assert_eq!(again, graph);
    }
});
