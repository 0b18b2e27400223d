use clap::Parser;
use pvstack::cli::{execute, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = execute(cli) {
        eprintln!("pvstack: {e}");
        std::process::exit(e.exit_code());
    }
}
