fn main() {
    std::process::exit(torind_cli::run(std::env::args_os()));
}
