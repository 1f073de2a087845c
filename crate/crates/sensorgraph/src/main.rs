fn main() {
    std::process::exit(sensorgraph::cli::run(std::env::args_os()));
}
