fn main() {
    std::process::exit(wedge_spectral::run(std::env::args_os()));
}
