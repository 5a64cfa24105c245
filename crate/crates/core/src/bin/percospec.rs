fn main() {
    std::process::exit(percospec::cli::cli_main(std::env::args_os()));
}
