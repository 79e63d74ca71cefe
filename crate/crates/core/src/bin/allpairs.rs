fn main() {
    std::process::exit(allpairs::cli::run(std::env::args_os()));
}
