fn main() {
    std::process::exit(ringbubble_cli::run(std::env::args_os()));
}
