use clap::Parser;

fn main() {
    if let Err(e) = tsc_lab::cli::run(tsc_lab::cli::Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
