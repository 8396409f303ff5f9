fn main() {
    std::process::exit(typeforge::cli::main_with(std::env::args_os()));
}
