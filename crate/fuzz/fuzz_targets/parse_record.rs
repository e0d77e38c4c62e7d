#![no_main]

use apsquares_cli::store::parse_record;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(line) = std::str::from_utf8(data) else { return };
    if let Ok(record) = parse_record(line) {
        let again = parse_record(&record.to_line()).expect("serialized record reparses");
        assert_eq!(again.result, record.result);
        assert_eq!(again.params, record.params);
    }
});
