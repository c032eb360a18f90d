fn main() {
    std::process::exit(tolerant::cli::run_from(std::env::args_os()));
}
