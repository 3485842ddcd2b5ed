fn main() {
    std::process::exit(lpcoreset::cli::run(std::env::args_os()));
}
