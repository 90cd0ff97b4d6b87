fn main() {
    std::process::exit(nsc_core::cli::run_cli(std::env::args()));
}
