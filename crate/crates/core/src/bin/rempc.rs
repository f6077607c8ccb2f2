fn main() {
    std::process::exit(hybrid_rempc::harness::cli::cli_main(std::env::args_os()));
}
