fn main() {
    std::process::exit(orbit_height::cli::run(std::env::args_os()));
}
