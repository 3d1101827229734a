fn main() -> std::process::ExitCode {
    transbem::cli::main_with_args(std::env::args())
}
