use clap::Parser;

fn main() {
    let cli = hw2f_cli::Cli::parse();
    if let Err(e) = hw2f_cli::run(&cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
