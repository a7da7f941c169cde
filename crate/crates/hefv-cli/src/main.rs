fn main() {
    std::process::exit(hefv_cli::run());
}
