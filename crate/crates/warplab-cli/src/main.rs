fn main() {
    eprintln!("lab: experiment driver not wired up yet");
    std::process::exit(2);
}
