fn main() {
    std::process::exit(beltrami::cli::run(std::env::args_os()));
}
