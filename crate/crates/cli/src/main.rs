use std::process::ExitCode;

use clap::Parser;
use gatelim_cli::run::{run, Cli, EXIT_PARSE};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let (reports, code) = run(&cli);
    for r in &reports {
        println!("{}", serde_json::to_string(r).expect("reports serialize"));
        if let Some(msg) = &r.message {
            eprintln!("error: {msg}");
        }
    }
    ExitCode::from(code as u8)
}
