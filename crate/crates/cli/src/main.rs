fn main() {
    std::process::exit(cbnorm_cli::run(std::env::args_os()));
}
