fn main() {
    std::process::exit(mclda::cli::cli_main(std::env::args_os()));
}
