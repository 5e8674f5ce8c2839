fn main() {
    std::process::exit(rwt::cli::main());
}
