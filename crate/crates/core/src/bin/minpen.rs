use std::process::ExitCode;

fn main() -> ExitCode {
    minpen::cli::main_with_args(std::env::args_os())
}
