fn main() {
    std::process::exit(phantomdr::cli::run(std::env::args_os()));
}
