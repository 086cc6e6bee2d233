fn main() {
    std::process::exit(evi_cli::run(std::env::args_os()));
}
