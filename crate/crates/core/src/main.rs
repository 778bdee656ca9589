fn main() {
    std::process::exit(fso_qos::cli::run(std::env::args_os()));
}
