use clap::Parser;

fn main() {
    let cli = hflow::Cli::parse();
    std::process::exit(hflow::run(&cli));
}
