fn main() {
    std::process::exit(ridgepca_cli::run(std::env::args_os()));
}
