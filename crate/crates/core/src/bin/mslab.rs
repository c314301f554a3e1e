fn main() {
    std::process::exit(mslab_core::cli::run(std::env::args_os()));
}
