fn main() {
    std::process::exit(kyc_cli::run(std::env::args_os()));
}
