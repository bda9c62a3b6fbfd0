fn main() {
    std::process::exit(btl_core::cli::cli_main(std::env::args().collect()));
}
