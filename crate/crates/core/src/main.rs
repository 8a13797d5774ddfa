fn main() {
    std::process::exit(orvar::cli::run(std::env::args_os()));
}
