fn main() {
    std::process::exit(gensmooth::cli::run_cli(std::env::args_os()));
}
