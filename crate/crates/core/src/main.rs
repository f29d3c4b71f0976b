fn main() -> std::process::ExitCode {
    rydberg_scaling::cli::main()
}
