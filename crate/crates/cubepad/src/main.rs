fn main() {
    std::process::exit(cubepad::cli::run());
}
