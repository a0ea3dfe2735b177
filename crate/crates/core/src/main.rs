use clap::Parser;

use decils::cli::{run, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let code = match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            decils::cli::EXIT_PARSE_ERROR
        }
    };
    std::process::exit(code);
}
