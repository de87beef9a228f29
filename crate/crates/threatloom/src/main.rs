fn main() {
    std::process::exit(threatloom::cli::run());
}
