fn main() {
    std::process::exit(sqrtwalk::cli::main_with_args(std::env::args_os()));
}
