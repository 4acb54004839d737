#![no_main]

use invsim::agents::protocol::Message;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(line) = std::str::from_utf8(data) else { return };
    if let Ok(msg) = Message::decode(line) {
        // whatever decodes must survive a round trip
        let again = Message::decode(&msg.encode()).expect("re-decode");
        assert_eq!(again, msg);
    }
});
