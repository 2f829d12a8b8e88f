fn main() {
    std::process::exit(pkm_cli::run(std::env::args_os()));
}
