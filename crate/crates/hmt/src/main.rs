use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;
use hmt::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let stderr = io::stderr();
    let mut out = stdout.lock();
    let mut err = stderr.lock();
    match run(cli, &mut out, &mut err) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = out.flush();
            let _ = writeln!(err, "hmt: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
