fn main() {
    std::process::exit(qfi_unruh::cli::run(std::env::args_os()));
}
