fn main() {
    std::process::exit(surgeflow_cli::run(std::env::args_os()));
}
