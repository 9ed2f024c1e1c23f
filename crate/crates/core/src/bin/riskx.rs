fn main() {
    std::process::exit(riskx::cli::main());
}
