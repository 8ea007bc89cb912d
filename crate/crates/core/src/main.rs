fn main() {
    std::process::exit(growthlab::cli::run_from(std::env::args_os()));
}
