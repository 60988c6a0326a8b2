fn main() {
    std::process::exit(somqe_cli::run(std::env::args_os()));
}
