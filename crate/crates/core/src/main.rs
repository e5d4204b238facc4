fn main() {
    std::process::exit(modcool::cli::run_cli(std::env::args_os()));
}
