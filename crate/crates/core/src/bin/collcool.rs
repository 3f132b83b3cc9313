fn main() {
    std::process::exit(collective_cooling::cli::main_with_args(std::env::args_os()));
}
