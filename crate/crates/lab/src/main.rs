fn main() {
    std::process::exit(ctc_lab::cli::run(std::env::args_os()));
}
