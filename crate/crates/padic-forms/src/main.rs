use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(padic_forms::cli::run_from(std::env::args_os()))
}
