fn main() {
    std::process::exit(skipover::cli::main_from_env());
}
