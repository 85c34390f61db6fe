fn main() {
    std::process::exit(crlqa::cli::run_cli(std::env::args_os()));
}
