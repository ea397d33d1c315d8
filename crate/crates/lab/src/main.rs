fn main() {
    std::process::exit(shearmix::cli::main_with_args(std::env::args_os()));
}
