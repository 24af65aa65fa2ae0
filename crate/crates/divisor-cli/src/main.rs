fn main() {
    std::process::exit(divisor_cli::run(std::env::args_os()));
}
