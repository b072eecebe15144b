use std::process::ExitCode;

fn main() -> ExitCode {
    dcbpp::cli::main_with_args(std::env::args_os())
}
