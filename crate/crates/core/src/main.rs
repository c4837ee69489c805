use std::process::ExitCode;

fn main() -> ExitCode {
    labsim::cli::main_entry()
}
