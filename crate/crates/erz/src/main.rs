fn main() {
    std::process::exit(erz::cli::main_with_args(std::env::args_os()));
}
