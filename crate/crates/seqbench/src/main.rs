fn main() {
    std::process::exit(seqbench::cli::run());
}
