fn main() {
    std::process::exit(cavity_mems::cli::run(std::env::args_os()));
}
