#![no_main]

use apsquares_cli::Cli;
use clap::Parser;
use libfuzzer_sys::fuzz_target;

// Arguments are NUL-separated; nothing is executed.
fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let argv = std::iter::once("apsquares").chain(s.split('\0'));
    if let Ok(cli) = Cli::try_parse_from(argv) {
        if !matches!(cli.command, apsquares_cli::Command::Replay(_)) {
            serde_json::to_string(&cli.command).expect("parsed commands serialize");
        }
    }
});
