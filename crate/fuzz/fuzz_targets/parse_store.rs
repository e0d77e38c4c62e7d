#![no_main]

use apsquares_cli::store::parse_store;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(records) = parse_store(text) {
            for r in &records {
                r.to_command().expect("accepted records name a valid command");
            }
        }
    }
});
