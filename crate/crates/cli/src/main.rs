use clap::Parser;

use reside_cli::args::Cli;
use reside_cli::commands::run;

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
