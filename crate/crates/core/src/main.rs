fn main() -> std::process::ExitCode {
    bianchi::cli::main()
}
