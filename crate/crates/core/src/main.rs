fn main() {
    std::process::exit(dualcx::cli::run(std::env::args_os()));
}
