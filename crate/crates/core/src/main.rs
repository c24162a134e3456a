fn main() {
    std::process::exit(multigraph_limits::cli::run());
}
