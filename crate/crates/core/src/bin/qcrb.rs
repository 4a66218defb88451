fn main() {
    std::process::exit(qcrb_core::cli::main());
}
