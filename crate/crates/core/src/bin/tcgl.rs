fn main() {
    std::process::exit(tcgl_core::cli::main_with_args(std::env::args_os()));
}
