use std::process::ExitCode;

use levy_spde::cli::{exit_code, parse_args, run};

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let result = parse_args(&args).and_then(|(cmd, cfg)| run(cmd, &cfg));
    match result {
        Ok(out) => {
            print!("{}", out.summary);
            for f in &out.files {
                eprintln!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("levy-spde: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
