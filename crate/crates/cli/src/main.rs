use std::process::ExitCode;

use clap::Parser;
use su2_intelligent_cli::args::{Cli, Command};
use su2_intelligent_cli::figure::figure_table;
use su2_intelligent_cli::output::emit;
use su2_intelligent_cli::state::{build_spec, render_state};
use su2_intelligent_cli::sweep::sweep_table;
use su2_intelligent_cli::verify::run_verify;
use su2_intelligent_cli::Result;

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::State(args) => {
            let spec = build_spec(args.la, args.lb, args.param()?)?;
            emit(args.output.out.as_deref(), &render_state(&spec, args.output.format)?)?;
        }
        Command::Sweep(args) => {
            let cfg = args.config()?;
            let table = sweep_table(&cfg)?;
            emit(cfg.out_path.as_deref(), &table.render(cfg.format)?)?;
        }
        Command::Figure(args) => {
            let table = figure_table(args.which)?;
            emit(args.output.out.as_deref(), &table.render(args.output.format)?)?;
        }
        Command::Verify(args) => {
            let summary = run_verify(&args.options())?;
            let mut json = serde_json::to_string_pretty(&summary)?;
            json.push('\n');
            emit(args.out.as_deref(), &json)?;
            if let Some(name) = summary.first_failure() {
                eprintln!("su2is: verification failed, first failing suite: {name}");
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("su2is: {e}");
            ExitCode::from(2)
        }
    }
}
