fn main() {
    std::process::exit(probekit::cli::main_with_args(std::env::args_os()));
}
