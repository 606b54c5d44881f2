fn main() {
    std::process::exit(rabuild::cli::main_with(std::env::args_os()));
}
