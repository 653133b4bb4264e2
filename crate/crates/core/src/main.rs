fn main() {
    std::process::exit(stabledrift::cli::cli_main(std::env::args_os()));
}
