fn main() {
    std::process::exit(scholarank::cli::run(std::env::args_os()));
}
