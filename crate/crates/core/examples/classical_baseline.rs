//! Without entanglement Bob's payoff ignores both players' operators: it is
//! the classical (2/3) cos²γ + (1/3) sin²γ whatever they play.

use std::f64::consts::FRAC_PI_2;

use qmh::linalg::random_su3;
use qmh::{expected_payoff, InitialStateRegime, Op3, PayoffMode};

fn main() -> qmh::Result<()> {
    let regime = InitialStateRegime::Unentangled;
    let i = Op3::identity();
    let a = random_su3(7)?;
    let b = random_su3(8)?;
    println!("{:>8} {:>10} {:>10} {:>10}", "gamma", "I vs I", "A vs I", "I vs B");
    for k in 0..=6 {
        let g = FRAC_PI_2 * k as f64 / 6.0;
        let row = [
            expected_payoff(&regime, &i, &i, g, PayoffMode::Incoherent)?.bob,
            expected_payoff(&regime, &a, &i, g, PayoffMode::Incoherent)?.bob,
            expected_payoff(&regime, &i, &b, g, PayoffMode::Incoherent)?.bob,
        ];
        println!("{g:>8.4} {:>10.6} {:>10.6} {:>10.6}", row[0], row[1], row[2]);
    }
    Ok(())
}
