use std::io::Write;

fn main() {
    let mut stdout = std::io::stdout().lock();
    let code = autostack::cli::run(std::env::args(), &mut stdout);
    stdout.flush().ok();
    std::process::exit(code);
}
