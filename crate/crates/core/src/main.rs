fn main() -> std::process::ExitCode {
    classnum::cli::main()
}
