fn main() {
    std::process::exit(delta_ionization::cli::run(std::env::args_os()));
}
