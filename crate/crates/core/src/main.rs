use clap::Parser;

use inverse_omit::cli::{execute, Args};

fn main() {
    let args = Args::parse();
    if let Err(e) = execute(&args) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
