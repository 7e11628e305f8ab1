fn main() {
    std::process::exit(cs_adapt::cli::run(std::env::args_os()));
}
