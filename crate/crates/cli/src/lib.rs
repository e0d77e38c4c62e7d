//! Command-line driver for `apsquares-core`.
//!
//! Exit codes: 0 success, 1 an invariant or contract violation was detected, 2 usage
//! or input error.

pub mod command;
pub mod int_arg;
pub mod store;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use apsquares_core::Error;
use clap::Parser;
use serde_json::{json, Value};

pub use command::{Cli, Command};
pub use int_arg::{parse_integer, IntArg};
pub use store::{RunRecord, STORE_ENV};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{rendered}") } else { write!(out, "{rendered}") };
            return code;
        }
    };
    let store = cli.store.clone().or_else(|| std::env::var_os(STORE_ENV).map(PathBuf::from));
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads.unwrap_or(0)).build() {
        Ok(pool) => pool,
        Err(e) => {
            let _ = writeln!(err, "error: cannot start worker pool: {e}");
            return EXIT_USAGE;
        }
    };
    match &cli.command {
        Command::Replay(args) => replay(&pool, &args.file, cli.json, out, err),
        command => execute(&pool, command, cli.json, store.as_deref(), out, err),
    }
}

fn error_code(e: &Error) -> i32 {
    match e {
        Error::ContractViolation(_) => EXIT_VIOLATION,
        Error::Domain(_) | Error::Overflow(_) => EXIT_USAGE,
    }
}

fn execute(pool: &rayon::ThreadPool, command: &Command, json: bool, store: Option<&std::path::Path>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let started = Instant::now();
    let outcome = match pool.install(|| command.execute()) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return error_code(&e);
        }
    };
    let wall_time_ms = started.elapsed().as_secs_f64() * 1e3;

    let invocation = serde_json::to_value(command).expect("commands serialize");
    if json {
        let doc = json!({ "command": invocation["command"], "params": invocation["params"], "result": outcome.result });
        let _ = writeln!(out, "{}", serde_json::to_string(&doc).expect("json output"));
    } else {
        let _ = write!(out, "{}", outcome.text);
    }

    if let Some(path) = store {
        let record = RunRecord {
            command: command.name().to_string(),
            params: match &invocation["params"] {
                Value::Object(map) => map.clone(),
                _ => Default::default(),
            },
            result: outcome.result,
            version: VERSION.to_string(),
            wall_time_ms,
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
            seed: None,
        };
        if let Err(e) = store::append_record(path, &record) {
            let _ = writeln!(err, "error: cannot append to store {}: {e}", path.display());
            return EXIT_USAGE;
        }
    }

    match outcome.violation {
        Some(v) => {
            let _ = writeln!(err, "invariant violation: {v}");
            EXIT_VIOLATION
        }
        None => EXIT_OK,
    }
}

fn replay(pool: &rayon::ThreadPool, path: &std::path::Path, json: bool, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let records = match store::read_store(path) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: {}: {e}", path.display());
            return EXIT_USAGE;
        }
    };
    let mut mismatches = 0;
    let mut report = Vec::new();
    for (i, record) in records.iter().enumerate() {
        let command = record.to_command().expect("validated by read_store");
        let status = match pool.install(|| command.execute()) {
            Ok(o) if o.result == record.result => "match",
            Ok(_) => "mismatch",
            Err(_) => "error",
        };
        if status != "match" {
            mismatches += 1;
        }
        report.push(json!({ "line": i + 1, "command": record.command, "status": status }));
        if !json {
            let _ = writeln!(out, "record {}: {} {}", i + 1, record.command, status);
        }
    }
    if json {
        let _ = writeln!(out, "{}", json!({ "records": report, "mismatches": mismatches }));
    } else {
        let _ = writeln!(out, "{} records, {} not reproduced", records.len(), mismatches);
    }
    if mismatches > 0 {
        EXIT_VIOLATION
    } else {
        EXIT_OK
    }
}
