fn main() {
    std::process::exit(pplab_cli::run(std::env::args_os()));
}
