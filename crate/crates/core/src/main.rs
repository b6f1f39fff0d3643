fn main() {
    std::process::exit(ibdr::cli::main_with_args(std::env::args_os()));
}
