fn main() -> std::process::ExitCode {
    fracwalk::cli::main()
}
