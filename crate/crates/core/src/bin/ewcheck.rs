fn main() {
    std::process::exit(ewcheck::cli::run(std::env::args_os()));
}
