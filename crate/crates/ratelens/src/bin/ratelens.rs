use std::process;

fn main() {
    process::exit(ratelens::cli::run(std::env::args_os()));
}
