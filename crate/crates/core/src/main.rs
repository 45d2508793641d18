use std::process::ExitCode;

use clap::Parser;
use yelp_analytics::cli::{run, Cli, CliError, RunConfig};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = RunConfig::try_from(cli.args).and_then(|config| run(cli.command, &config));
    match result {
        Ok(report) => {
            print!("{}", report.render_text());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &CliError) -> ExitCode {
    ExitCode::from(e.exit_code() as u8)
}
