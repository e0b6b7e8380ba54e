fn main() {
    std::process::exit(hypodense::cli::main_with_args(std::env::args_os()));
}
