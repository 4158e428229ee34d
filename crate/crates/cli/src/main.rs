fn main() {
    std::process::exit(splitsea_cli::main_with(std::env::args().collect()));
}
