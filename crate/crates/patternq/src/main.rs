use std::process::ExitCode;

use clap::Parser;
use env_logger::Env;

use patternq::commands::{run, Cli};

fn main() -> ExitCode {
    env_logger::Builder::from_env(Env::new().filter_or("PATTERNQ_LOG", "warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("patternq: error [{}]: {}", e.stage.as_str(), e.message);
            ExitCode::from(1)
        }
    }
}
