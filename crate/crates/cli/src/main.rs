fn main() {
    std::process::exit(htsim_cli::commands::run(std::env::args_os()));
}
