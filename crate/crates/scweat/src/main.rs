use std::process::ExitCode;

fn main() -> ExitCode {
    let args = std::env::args_os()
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    scweat::cli::run(args)
}
