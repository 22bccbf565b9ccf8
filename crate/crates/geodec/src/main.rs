use clap::Parser;

use geodec::cli::{run, Cli, EXIT_INPUT, EXIT_OK};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Usage errors share the input-error code; clap's own 2 means unsolvable here.
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let outcome = run(&cli);
    print!("{}", outcome.text);
    if let Some(msg) = &outcome.error {
        eprintln!("error: {msg}");
    }
    std::process::exit(outcome.code);
}
