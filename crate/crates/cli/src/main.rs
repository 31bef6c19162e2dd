use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rainweave_cli::{
    cmd_inspect, cmd_pairs, cmd_transfer, CliError, InspectArgs, PairsArgs, TransferArgs,
};

/// Transfer real rain structure from an exemplar photo onto rain-free images.
#[derive(Debug, Parser)]
#[command(name = "rainweave", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Quilt exemplar rain over each target and write <stem>_rain.png
    Transfer(TransferArgs),
    /// Emit aligned clean/rain patch pairs for training
    Pairs(PairsArgs),
    /// Report valid patch positions and residual statistics
    Inspect(InspectArgs),
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Transfer(args) => {
            let m = cmd_transfer(&args)?;
            println!(
                "wrote {} image(s) and manifest to {} ({:.0} ms)",
                m.outputs.len(),
                args.out.display(),
                m.timing.load_ms + m.timing.extract_ms + m.timing.synthesize_ms + m.timing.write_ms
            );
        }
        Command::Pairs(args) => {
            let m = cmd_pairs(&args)?;
            println!(
                "wrote {} pair(s) to {}",
                m.outputs.len() / 2,
                args.out.join("pairs").display()
            );
        }
        Command::Inspect(args) => {
            let report = cmd_inspect(&args)?;
            if args.json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&report).expect("report serializes")
                );
            } else {
                print!("{report}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rainweave: {} error: {e}", e.class());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
