fn main() {
    std::process::exit(spectral_intervals_cli::run(std::env::args_os()));
}
