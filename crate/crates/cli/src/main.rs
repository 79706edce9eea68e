use clap::Parser;

fn main() {
    let cli = hjscc_cli::Cli::parse();
    if let Err(e) = hjscc_cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
