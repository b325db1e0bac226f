fn main() { nehari::cli::main() }
