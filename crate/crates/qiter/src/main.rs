fn main() {
    std::process::exit(qiter::cli::run(std::env::args()));
}
