fn main() {
    std::process::exit(wracah_core::cli::run(std::env::args_os()));
}
