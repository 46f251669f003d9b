use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(weyllab::cli::main_entry())
}
