use std::process::ExitCode;

fn main() -> ExitCode {
    taupipe::cli::main()
}
