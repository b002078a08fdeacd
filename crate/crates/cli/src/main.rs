use clap::Parser;

fn main() {
    let cli = qpf_cli::args::Cli::parse();
    let code = qpf_cli::run(cli, &mut std::io::stdout().lock(), &mut std::io::stderr().lock());
    std::process::exit(code);
}
