use clap::Parser;

fn main() {
    let cli = djr_cli::args::Cli::parse();
    let code = match djr_cli::run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    };
    std::process::exit(code);
}
