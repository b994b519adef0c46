use clap::Parser;
use plap_cli::commands::{run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(plap_cli::exit_code(&e));
    }
}
