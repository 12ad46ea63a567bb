fn main() {
    std::process::exit(hm_core::cli::main_with(std::env::args_os()));
}
