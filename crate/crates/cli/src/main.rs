use clap::Parser;

fn main() {
    let cli = semilinear_cli::Cli::parse();
    std::process::exit(semilinear_cli::run(cli));
}
