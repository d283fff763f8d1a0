fn main() {
    std::process::exit(xlmp::harness::cli_main(std::env::args_os()));
}
