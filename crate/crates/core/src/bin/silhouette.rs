fn main() {
    std::process::exit(silhouette::cli::run(std::env::args_os()));
}
