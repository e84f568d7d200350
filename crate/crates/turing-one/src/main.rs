fn main() {
    std::process::exit(turing_one::cli::run(std::env::args_os()));
}
