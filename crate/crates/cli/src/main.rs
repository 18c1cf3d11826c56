fn main() {
    std::process::exit(metricpoly_cli::main_with_args(std::env::args_os()));
}
