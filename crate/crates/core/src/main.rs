fn main() {
    std::process::exit(odesurface::cli::main_with_args(std::env::args_os()));
}
