fn main() {
    std::process::exit(infoqm_cli::run(std::env::args_os()));
}
