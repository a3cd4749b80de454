use clap::Parser;
use ldg_cli::{run, Cli, ExitStatus};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { ExitStatus::Parse.code() } else { 0 };
            std::process::exit(code);
        }
    };
    let code = match run(&cli) {
        Ok(status) => status.code(),
        Err(e) => {
            eprintln!("ldg: {e}");
            e.status().code()
        }
    };
    std::process::exit(code);
}
