fn main() -> std::process::ExitCode {
    ltmax_cli::run(std::env::args_os())
}
