#![no_main]

use invsim::kernel::StepRecord;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(step) = serde_json::from_slice::<StepRecord>(data) {
        let text = serde_json::to_string(&step).expect("step serializes");
        let back: StepRecord = serde_json::from_str(&text).expect("step re-parses");
        assert_eq!(back, step);
    }
});
