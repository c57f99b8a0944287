fn main() {
    std::process::exit(sobolev_lab::harness::run_cli(std::env::args_os()));
}
