fn main() {
    std::process::exit(jointlife::cli::run());
}
