use std::process::ExitCode;

use clap::Parser;
use rankfield_cli::{run, Cli};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("RANKFIELD_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("rankfield: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
