use std::process::ExitCode;

use clap::Parser;

use ribotide::config::{from_cli, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = from_cli(cli).and_then(|cfg| ribotide::run(&cfg).map(|s| (cfg, s)));
    match result {
        Ok((cfg, summary)) => {
            println!("{}", summary.line(cfg.subcommand));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
