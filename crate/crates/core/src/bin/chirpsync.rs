fn main() {
    std::process::exit(chirpsync::cli::main());
}
