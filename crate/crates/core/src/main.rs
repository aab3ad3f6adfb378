fn main() -> std::process::ExitCode {
    smm::cli::main_with(std::env::args_os())
}
