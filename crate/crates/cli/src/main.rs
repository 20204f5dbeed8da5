fn main() {
    std::process::exit(hardy_lab::run(std::env::args_os()));
}
