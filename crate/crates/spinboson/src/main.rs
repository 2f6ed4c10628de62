fn main() {
    std::process::exit(spinboson::cli::main_with(std::env::args_os()));
}
