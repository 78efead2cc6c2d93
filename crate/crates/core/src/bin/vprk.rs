fn main() {
    std::process::exit(vprk::cli::run_cli(std::env::args_os()));
}
