//! The built-in color-blob detector behind the line protocol, for exercising
//! the subprocess path of `vmt run --sut`.

use std::io;
use std::process::ExitCode;

use vmt_core::sut::mock_handler;
use vmt_core::sut::protocol::serve;

fn main() -> ExitCode {
    let stdin = io::stdin().lock();
    let stdout = io::stdout().lock();
    match serve(mock_handler, stdin, stdout) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("vmt-mock-sut: {e}");
            ExitCode::FAILURE
        }
    }
}
