use clap::Parser;

fn main() {
    let cli = bois::cli::Cli::parse();
    let code = match bois::cli::execute(cli, &mut std::io::stdout().lock()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            bois::cli::EXIT_ERROR
        }
    };
    std::process::exit(code);
}
