fn main() {
    std::process::exit(irisgauge_cli::run(std::env::args_os()));
}
