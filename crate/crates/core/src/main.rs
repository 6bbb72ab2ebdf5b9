fn main() {
    std::process::exit(etaspec::cli::main_with_args(std::env::args_os()));
}
