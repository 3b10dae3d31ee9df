fn main() {
    std::process::exit(causal_svm::cli::main_with_args(std::env::args_os()));
}
