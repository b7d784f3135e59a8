//! Alice's H makes the entangled game fair: Bob gets 1/2 whatever γ he picks
//! while playing the identity, and H's conjugate-based reply is fair too.

use std::f64::consts::FRAC_PI_2;

use qmh::strategy::{fair_h, fair_reply};
use qmh::{expected_payoff, InitialStateRegime, Op3, PayoffMode};

fn main() -> qmh::Result<()> {
    let e = InitialStateRegime::Entangled;
    let h = fair_h();
    println!("H = {h:?}");
    for k in 0..=4 {
        let g = FRAC_PI_2 * k as f64 / 4.0;
        let p = expected_payoff(&e, &h, &Op3::identity(), g, PayoffMode::Incoherent)?;
        println!("gamma {g:.4}: bob {:.12} alice {:.12}", p.bob, p.alice);
    }
    let b = qmh::linalg::random_su3(3)?;
    let reply = fair_reply(&b);
    for g in [0.0, FRAC_PI_2] {
        let p = expected_payoff(&e, &reply, &b, g, PayoffMode::Incoherent)?;
        println!("random B vs H B*, gamma {g:.4}: bob {:.12}", p.bob);
    }
    Ok(())
}
