fn main() {
    std::process::exit(forchheimer::cli::run(std::env::args_os()));
}
