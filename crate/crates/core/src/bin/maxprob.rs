fn main() {
    std::process::exit(maxprob::cli::run(std::env::args_os()));
}
