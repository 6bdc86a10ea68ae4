fn main() -> std::process::ExitCode {
    af_secrecy::cli::main()
}
