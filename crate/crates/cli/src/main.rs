fn main() {
    std::process::exit(epr_cascade_cli::main_with_args(std::env::args_os()));
}
