use std::io::Write;

fn main() {
    let argv: Vec<String> = std::env::args().collect();
    let out = deltaeq_cli::run(&argv, &mut std::io::stdin().lock());
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    let _ = std::io::stdout().flush();
    std::process::exit(out.code);
}
