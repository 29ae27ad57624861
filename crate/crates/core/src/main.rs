use clap::Parser;

use cadfit::cli::{run, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (line, code) = run(cli);
    println!("{line}");
    std::process::exit(code);
}
