fn main() {
    std::process::exit(dyson_lab::run(std::env::args().collect()));
}
