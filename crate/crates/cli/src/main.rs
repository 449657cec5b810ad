use cambody_cli::args::{Cli, Command};
use cambody_cli::commands;
use clap::error::ErrorKind;
use clap::Parser;

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                print!("{e}");
                std::process::exit(0);
            }
            _ => {
                // Bad flags are expected failures, not internal errors.
                eprint!("{e}");
                std::process::exit(1);
            }
        },
    };

    let result = match &cli.command {
        Command::Synth(args) => commands::synth::run(args, cli.quiet),
        Command::Fit(args) => commands::fit::run(args, cli.quiet),
        Command::Eval(args) => commands::eval::run(args, cli.quiet),
        Command::Sensitivity(args) => commands::sensitivity::run(args, cli.quiet),
        Command::Gradcheck(args) => commands::gradcheck::run(args, cli.quiet),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
