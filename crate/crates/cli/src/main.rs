use std::path::PathBuf;
use std::process::ExitCode;

use biham_cli::{base_dir, load, run, validate_text, CliError, Command};
use clap::Parser;
use serde_json::json;

#[derive(Parser, Debug)]
#[command(name = "biham", version, about = "Biorthogonal non-Hermitian dynamics scenarios")]
struct Args {
    #[arg(value_enum)]
    command: Command,

    /// JSON scenario config.
    #[arg(long)]
    config: PathBuf,

    /// Directory for the output artifact.
    #[arg(long)]
    out: PathBuf,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Print diagnostics and exit without running.
    #[arg(long)]
    validate_only: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("BIHAM_LOG", "warn")).init();
    let args = Args::parse();

    let result = if args.validate_only {
        validate_only(&args)
    } else {
        load(args.command, &args.config, &args.out, args.seed)
            .and_then(|cfg| run(&cfg))
            .map(|summary| println!("{}", serde_json::to_string(&summary).expect("summary serializes")))
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let diagnostics = match &e {
                CliError::Config(d) => d.clone(),
                _ => Vec::new(),
            };
            eprintln!(
                "{}",
                json!({"error": e.code(), "message": e.to_string(), "diagnostics": diagnostics})
            );
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn validate_only(args: &Args) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| CliError::io(&args.config, e))?;
    let diagnostics = validate_text(args.command, &text, &base_dir(&args.config), args.seed);
    println!("{}", json!({"command": args.command.name(), "diagnostics": diagnostics}));
    if diagnostics.is_empty() {
        Ok(())
    } else {
        Err(CliError::Config(diagnostics))
    }
}
