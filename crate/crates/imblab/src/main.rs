fn main() {
    std::process::exit(imblab::cli::main_with_args(std::env::args_os()));
}
