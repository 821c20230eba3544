use clap::Parser;

use heislab::cli::{run, RunSpec};

fn main() {
    let spec = RunSpec::parse();
    std::process::exit(run(&spec));
}
