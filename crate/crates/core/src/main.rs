use clap::Parser;

fn main() {
    let cli = entscat::cli::Cli::parse();
    std::process::exit(entscat::cli::run(cli));
}
