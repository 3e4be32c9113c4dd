use clap::Parser;
use ncn_cli::args::{dispatch, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("NCN_LOG", "error")).init();
    std::process::exit(dispatch(Cli::parse()));
}
