fn main() {
    std::process::exit(smsn::cli::main());
}
