use std::process::ExitCode;

use pare::cli::{parse_args, run, usage};
use pare::PareError;

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let outcome = parse_args(&args).and_then(|(command, config)| run(command, &config));
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            if matches!(err, PareError::Usage(_)) {
                eprintln!("{}", usage());
            }
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
