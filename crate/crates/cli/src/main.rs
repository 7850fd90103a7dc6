fn main() {
    std::process::exit(knitc::run(std::env::args_os()));
}
