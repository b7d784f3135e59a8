//! Numerical best responses over SU(3), for Bob and for Alice.
//!
//!     cargo run --release --example best_response -- [starts] [seed]

use qmh::equilibrium::{best_response_alice, best_response_bob, SearchOptions};
use qmh::linalg::random_su3;
use qmh::{InitialStateRegime, MixedStrategy, NamedStrategy, PayoffMode};

fn main() -> qmh::Result<()> {
    let mut args = std::env::args().skip(1);
    let starts = args.next().map_or(16, |s| s.parse().expect("starts"));
    let seed = args.next().map_or(0, |s| s.parse().expect("seed"));
    let opts = SearchOptions {
        starts,
        seed,
        ..SearchOptions::default()
    };
    let inc = PayoffMode::Incoherent;

    let vs_identity = MixedStrategy::pure(NamedStrategy::Identity);
    let r = best_response_bob(&InitialStateRegime::Unentangled, &vs_identity, inc, &opts)?;
    println!(
        "unentangled, Bob vs A = I: value {:.6}, branch {:?}, {} evaluations",
        r.value, r.gamma_branch, r.evaluations
    );

    let a = random_su3(seed)?;
    let r = best_response_bob(
        &InitialStateRegime::Entangled,
        &MixedStrategy::pure(NamedStrategy::Matrix(a)),
        inc,
        &opts,
    )?;
    println!("entangled, Bob vs random A: value {:.9}", r.value);

    let r = best_response_alice(&InitialStateRegime::Entangled, &vs_identity, 0.0, inc, &opts)?;
    println!(
        "entangled, Alice vs B = I switching: Bob left with {:.3e}",
        r.bob_payoff
    );
    println!("  coordinates {:?}", r.strategy.theta);
    Ok(())
}
