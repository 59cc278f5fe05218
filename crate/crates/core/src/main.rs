fn main() -> std::process::ExitCode {
    dwadvisor::cli::main()
}
