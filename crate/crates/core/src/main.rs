fn main() {
    std::process::exit(trigger_tree::cli::run(std::env::args_os()));
}
