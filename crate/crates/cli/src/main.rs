fn main() {
    std::process::exit(rcwb_cli::run(std::env::args_os()));
}
