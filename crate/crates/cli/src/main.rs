fn main() {
    std::process::exit(graphlap::run(std::env::args_os()));
}
