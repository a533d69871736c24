use clap::Parser;
use laf_cli::Cli;

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // Usage errors are tool errors; help and version are not.
            std::process::exit(if e.use_stderr() { 3 } else { 0 });
        }
    };
    let code = laf_cli::run(&cli.cmd).unwrap_or_else(|e| {
        eprintln!("laf: {e}");
        3
    });
    std::process::exit(code);
}
