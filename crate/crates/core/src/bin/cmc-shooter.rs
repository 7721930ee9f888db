fn main() {
    std::process::exit(cmc_shooter::cli::main_with_args(std::env::args_os()));
}
