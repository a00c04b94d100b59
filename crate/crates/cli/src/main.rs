fn main() {
    std::process::exit(hyperuniform_cli::run(std::env::args_os()));
}
