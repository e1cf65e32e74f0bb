fn main() {
    std::process::exit(rainrule::cli::main_with_args(std::env::args_os()));
}
