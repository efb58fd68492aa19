//! Command-line entry point.

fn main() {
    std::process::exit(enclosure::cli::run(std::env::args_os()));
}
