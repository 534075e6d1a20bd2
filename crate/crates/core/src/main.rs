fn main() {
    std::process::exit(hlv_qmc::cli::run(std::env::args_os()));
}
