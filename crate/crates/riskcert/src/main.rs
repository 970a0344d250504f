fn main() {
    std::process::exit(riskcert::cli::run());
}
