fn main() {
    std::process::exit(cantor_distortion::cli::run(std::env::args_os()));
}
