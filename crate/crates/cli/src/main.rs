fn main() {
    std::process::exit(cdd_cli::main_with_args(std::env::args_os()));
}
