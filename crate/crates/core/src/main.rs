fn main() {
    std::process::exit(rksvd::cli::run_with_args(std::env::args_os()));
}
