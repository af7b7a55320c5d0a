use clap::Parser;
use galerkin_cli::Cli;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    std::process::exit(galerkin_cli::run(&cli));
}
