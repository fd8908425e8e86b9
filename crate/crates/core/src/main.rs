use std::io::Write;
use std::process::ExitCode;

use hankel_lab::cli::{execute, THREADS_ENV};
use hankel_lab::par;

fn main() -> ExitCode {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        match v.trim().parse::<usize>() {
            Ok(n) => {
                par::configure_threads(n);
            }
            Err(_) => eprintln!("warning: ignoring {THREADS_ENV}={v:?}"),
        }
    }
    let outcome = execute(std::env::args_os());
    let _ = std::io::stdout().write_all(outcome.stdout.as_bytes());
    let _ = std::io::stderr().write_all(outcome.stderr.as_bytes());
    ExitCode::from(outcome.code.clamp(0, 255) as u8)
}
