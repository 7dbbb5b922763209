use std::process::ExitCode;

use clap::Parser;

mod config;
mod run;

use config::{parse_config, Cli};

fn main() -> ExitCode {
    if let Some(threads) = std::env::var("DI_FORGE_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // clap reports help and version requests through the same path
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = parse_config(cli)
        .map_err(run::Failure::from)
        .and_then(|cfg| run::run(&cfg));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("di-forge: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
