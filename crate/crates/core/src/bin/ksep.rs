use std::panic;

fn main() {
    // exit 1 on internal errors (panics), as distinct from exit 2 on
    // rejected input; the panic hook still prints the message first
    let code = panic::catch_unwind(|| ksep::cli::run(std::env::args_os())).unwrap_or(1);
    std::process::exit(code);
}
