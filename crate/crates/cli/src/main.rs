fn main() {
    std::process::exit(levy_exit_cli::run(std::env::args_os()));
}
