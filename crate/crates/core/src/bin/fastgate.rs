fn main() {
    std::process::exit(fastgate::cli::run(std::env::args_os()));
}
