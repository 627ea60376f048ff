fn main() {
    std::process::exit(tutorweb::cli::run(std::env::args_os()));
}
