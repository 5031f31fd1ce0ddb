use clap::Parser;
use noetherlab::cli;

fn main() {
    let args = cli::Cli::parse();
    std::process::exit(cli::run(args));
}
