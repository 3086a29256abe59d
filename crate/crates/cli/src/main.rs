fn main() {
    std::process::exit(piezobeam_cli::run(std::env::args_os()));
}
