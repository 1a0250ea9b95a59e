fn main() {
    std::process::exit(rectfree_cli::run(std::env::args_os()));
}
