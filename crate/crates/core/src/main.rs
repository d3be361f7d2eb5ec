fn main() {
    std::process::exit(axwave::runner::cli_main(std::env::args_os()));
}
