fn main() {
    std::process::exit(hilfer::cli::main_with(std::env::args_os()));
}
