//! Runs the full verification suite and prints the claim table.
//!
//!     cargo run --release --example verify_claims -- [seed] [--quick]

use qmh::reproduction::{verify_all, VerifyOptions};

fn main() {
    let mut opts = VerifyOptions::default();
    for arg in std::env::args().skip(1) {
        if arg == "--quick" {
            opts.quick = true;
        } else {
            opts.seed = arg.parse().expect("seed must be an unsigned integer");
        }
    }
    let report = verify_all(&opts);
    println!("{report}");
    if !report.all_pass() {
        std::process::exit(1);
    }
}
