fn main() {
    std::process::exit(linkopt::cli::run(std::env::args_os()));
}
