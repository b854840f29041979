use std::io;
use std::process::ExitCode;

use clap::Parser;
use revflow_cli::{dispatch, Cli, Io};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mut out, mut err) = (io::stdout().lock(), io::stderr().lock());
    let code = dispatch(
        cli,
        &mut Io {
            out: &mut out,
            err: &mut err,
        },
    );
    ExitCode::from(code as u8)
}
