use std::process::ExitCode;

fn main() -> ExitCode {
    hierlabel::cli::main_with_args(std::env::args_os())
}
