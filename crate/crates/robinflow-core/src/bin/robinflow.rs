fn main() {
    std::process::exit(robinflow_core::cli::run(std::env::args_os()));
}
