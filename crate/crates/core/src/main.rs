fn main() {
    std::process::exit(w3cone::cli::main_with_args(std::env::args_os()));
}
