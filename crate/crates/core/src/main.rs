fn main() {
    std::process::exit(polarize_core::cli::run(std::env::args_os()));
}
