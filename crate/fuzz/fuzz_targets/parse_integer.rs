#![no_main]

use apsquares_cli::parse_integer;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(n) = parse_integer(s) {
        let printed = n.to_string();
        assert_eq!(parse_integer(&printed).expect("canonical form parses"), n);
    }
});
