//! The `ltmax` command line.
//!
//! Exit status: 0 on success, 2 for an invalid configuration, 1 when a hard
//! invariant fails or on I/O errors, 130 after an interrupt (a checkpoint is
//! written first).

pub mod args;
mod commands;
pub mod config;
pub mod output;
pub mod plot;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::AtomicBool;
use std::sync::OnceLock;

use clap::Parser;

pub use args::Cli;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Invariant(String),
    Interrupted(PathBuf),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Invariant(_) | CliError::Runtime(_) => 1,
            CliError::Interrupted(_) => 130,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "invalid configuration: {m}"),
            CliError::Invariant(m) => write!(f, "invariant violated: {m}"),
            CliError::Interrupted(p) => write!(f, "interrupted; resume with `ltmax checkpoint-resume --checkpoint {}`", p.display()),
            CliError::Runtime(m) => write!(f, "{m}"),
        }
    }
}

impl From<ltmax_core::Error> for CliError {
    fn from(e: ltmax_core::Error) -> Self {
        match e {
            ltmax_core::Error::InvalidConfig(m) => CliError::Usage(m),
            ltmax_core::Error::InvalidInput(m) => CliError::Usage(m),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

/// Set by the interrupt handler; chunked runs drain and checkpoint.
pub(crate) fn stop_flag() -> &'static AtomicBool {
    static STOP: OnceLock<AtomicBool> = OnceLock::new();
    STOP.get_or_init(|| {
        let _ = ctrlc::set_handler(|| {
            stop_flag().store(true, std::sync::atomic::Ordering::SeqCst);
        });
        AtomicBool::new(false)
    })
}

pub fn run<I: IntoIterator<Item = OsString>>(argv: I) -> ExitCode {
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .try_init();
    let argv = match config::expand(argv.into_iter().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("ltmax: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let threads = cli.command.common().threads;
    if threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            log::warn!("thread pool already configured: {e}");
        }
    }
    match commands::dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ltmax: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
