fn main() {
    std::process::exit(cmkv::cli::main(std::env::args_os()));
}
