use std::process::ExitCode;

fn main() -> ExitCode {
    sbigof::cli::run(std::env::args_os())
}
