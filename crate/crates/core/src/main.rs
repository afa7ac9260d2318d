fn main() {
    std::process::exit(starseg::cli::run(std::env::args_os()));
}
