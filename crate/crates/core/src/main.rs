use std::process::ExitCode;

fn main() -> ExitCode {
    polyhead::cli::run(std::env::args_os())
}
