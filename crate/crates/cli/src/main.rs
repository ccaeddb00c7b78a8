fn main() {
    std::process::exit(oversmooth_cli::run(std::env::args_os()));
}
