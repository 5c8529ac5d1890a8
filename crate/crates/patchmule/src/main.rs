fn main() {
    std::process::exit(patchmule::cli::run());
}
