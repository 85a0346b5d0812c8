use clap::Parser;

use career_game::cli::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()));
}
