use std::panic;
use std::process::ExitCode;

use clap::Parser;

use bacycle::cli::{run, Cli, CliError};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let human = cli.human_errors;
    let code = match panic::catch_unwind(move || run(cli)) {
        Ok(code) => code,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            CliError::internal(msg).emit(human);
            bacycle::cli::EXIT_INTERNAL
        }
    };
    ExitCode::from(code as u8)
}
