fn main() -> std::process::ExitCode {
    treexplain::cli::main()
}
