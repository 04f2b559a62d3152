fn main() {
    std::process::exit(wsannot_cli::run(std::env::args_os()));
}
