use std::process::ExitCode;

fn main() -> ExitCode {
    phaselab::cli::main_with(std::env::args_os())
}
