use std::process::ExitCode;

use clap::Parser;
use qmanifold::cli::{exit_code, run, JobConfig};

fn main() -> ExitCode {
    let cfg = match JobConfig::try_parse() {
        Ok(cfg) => cfg,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = run(&cfg, &mut std::io::stdout().lock());
    if let Err(e) = &result {
        eprintln!("error: {e}");
    }
    ExitCode::from(exit_code(&result))
}
