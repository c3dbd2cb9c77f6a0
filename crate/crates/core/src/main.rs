fn main() {
    let code = poet_forge::cli::run(std::env::args());
    std::process::exit(code);
}
