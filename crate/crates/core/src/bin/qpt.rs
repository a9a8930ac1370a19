fn main() {
    std::process::exit(qpt_core::cli::run(std::env::args_os()));
}
