fn main() {
    std::process::exit(envma::cli::main_entry());
}
