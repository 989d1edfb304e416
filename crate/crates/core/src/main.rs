fn main() {
    std::process::exit(mobitrace::cli::main_with_args(std::env::args_os()));
}
