fn main() {
    let argv: Vec<String> = std::env::args().collect();
    std::process::exit(modular_lab::cli::run(&argv));
}
