fn main() {
    std::process::exit(bogokit::cli::main_with_args(std::env::args_os()));
}
