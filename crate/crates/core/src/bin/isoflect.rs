use clap::Parser;

fn main() {
    let cli = isoflect::cli::Cli::parse();
    std::process::exit(isoflect::cli::run(cli));
}
