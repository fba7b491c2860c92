fn main() {
    std::process::exit(luders_cli::main_with_args(std::env::args_os()));
}
