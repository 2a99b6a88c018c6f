fn main() {
    std::process::exit(morphtest::cli::main());
}
