fn main() {
    std::process::exit(epigrid::harness::cli::cli_main(std::env::args_os()));
}
