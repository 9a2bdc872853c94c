fn main() {
    std::process::exit(qdp_cli::app::main_with(std::env::args_os()));
}
