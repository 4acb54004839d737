#![no_main]

use invsim::harness::{emit_tables, BatchSummary};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(summary) = serde_json::from_slice::<BatchSummary>(data) {
        let _ = emit_tables(&[summary]);
    }
});
