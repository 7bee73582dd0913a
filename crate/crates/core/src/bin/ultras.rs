use std::io::Write;

fn main() {
    let report = ultras::cli::run(std::env::args_os());
    print!("{}", report.stdout);
    eprint!("{}", report.stderr);
    std::io::stdout().flush().ok();
    std::process::exit(report.code);
}
