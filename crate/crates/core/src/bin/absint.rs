fn main() -> std::process::ExitCode {
    absint::cli::main()
}
