fn main() {
    std::process::exit(karst_fem::cli::main_with_args(std::env::args_os()));
}
