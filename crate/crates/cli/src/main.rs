use clap::Parser;
use ssa_cli::{run, Cli, RunConfig, EXIT_USAGE};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let result = RunConfig::from_command(&cli.command).and_then(|cfg| run(&cfg));
    if let Err(e) = result {
        eprintln!("ssa: {e}");
        std::process::exit(e.code);
    }
}
