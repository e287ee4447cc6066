fn main() {
    std::process::exit(parisian::cli::main_with(std::env::args().collect()));
}
