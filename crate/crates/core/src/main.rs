fn main() -> std::process::ExitCode {
    hgnet::cli::run(std::env::args_os())
}
