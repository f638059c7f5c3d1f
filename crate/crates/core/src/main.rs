fn main() {
    std::process::exit(aclab::cli::main_with_args(std::env::args_os()));
}
