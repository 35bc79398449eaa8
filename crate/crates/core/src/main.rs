fn main() {
    std::process::exit(pylang::cli::main());
}
