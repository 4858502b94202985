fn main() {
    std::process::exit(specdecomp::main_with(std::env::args_os()));
}
