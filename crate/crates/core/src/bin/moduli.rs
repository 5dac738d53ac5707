fn main() {
    std::process::exit(moduli_lab::cli::run(std::env::args_os()));
}
