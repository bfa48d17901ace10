fn main() {
    std::process::exit(kronpencil::cli::run(std::env::args_os()));
}
