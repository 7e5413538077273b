use std::process::ExitCode;

fn main() -> ExitCode {
    frontier_merge::cli::main_from(std::env::args_os())
}
