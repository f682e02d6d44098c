fn main() {
    std::process::exit(gics_cli::run(std::env::args_os()));
}
