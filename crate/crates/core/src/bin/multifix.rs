fn main() {
    std::process::exit(multifix::cli::main_with_args(std::env::args_os()));
}
