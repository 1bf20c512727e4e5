use std::io;

fn main() {
    let code = rigid_genera::cli::run(std::env::args_os(), &mut io::stdout(), &mut io::stderr());
    std::process::exit(code);
}
