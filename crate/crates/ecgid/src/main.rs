fn main() {
    std::process::exit(ecgid::cli::run(std::env::args_os()));
}
