use std::process::ExitCode;

fn main() -> ExitCode {
    let command = match depthnet_cli::parse_args(std::env::args_os()) {
        Ok(command) => command,
        Err(err) => {
            if err.is_informational() {
                println!("{err}");
            } else {
                eprintln!("{err}");
            }
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    match depthnet_cli::run(&command, &mut std::io::stdout().lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
