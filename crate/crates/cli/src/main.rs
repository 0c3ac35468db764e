fn main() {
    std::process::exit(mtbi_cli::main_with_args(std::env::args_os()));
}
