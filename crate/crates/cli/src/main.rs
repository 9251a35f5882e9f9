use clap::Parser;
use gustqa_cli::{run, Cli, ExitCode};
use tracing_subscriber::EnvFilter;

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { ExitCode::Usage } else { ExitCode::Success };
            let _ = e.print();
            std::process::exit(code as i32);
        }
    };
    let filter = EnvFilter::try_from_default_env().or_else(|_| EnvFilter::try_new(&cli.log));
    let filter = match filter {
        Ok(f) => f,
        Err(e) => {
            eprintln!("gustqa: invalid --log filter: {e}");
            std::process::exit(ExitCode::Usage as i32);
        }
    };
    tracing_subscriber::fmt().with_env_filter(filter).with_writer(std::io::stderr).with_target(false).init();

    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("gustqa: {e}");
            e.code
        }
    };
    std::process::exit(code as i32);
}
