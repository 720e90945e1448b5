fn main() {
    std::process::exit(aig_core::cli::main_entry(std::env::args_os()));
}
