//! Drive the command-line layer from code and print the JSON report.

use tophier::cli;

fn main() {
    let out = cli::run(["--json", "gw0", "chern", "--variety", "k3"]);
    print!("{}", out.stdout);
    println!("exit code {}", out.code);
}
