fn main() {
    std::process::exit(qcat::workflow::run_cli(std::env::args().collect()));
}
