fn main() {
    std::process::exit(quantreactor::cli::run(std::env::args_os()));
}
