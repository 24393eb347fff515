use std::process::ExitCode;

use divsum::cli::{parse_args, run};

fn main() -> ExitCode {
    let code = match parse_args(std::env::args_os()) {
        Ok(config) => run(&config),
        Err(e) => e.report(),
    };
    ExitCode::from(code as u8)
}
