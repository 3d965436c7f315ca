fn main() {
    std::process::exit(migtopo::run_cli(std::env::args_os()));
}
