//! Every revealed operator has a counter in the entangled game. Bob answers
//! Alice's A with A* and stays; Alice answers a switching Bob with B* and a
//! staying Bob with M1 B*.

use qmh::linalg::random_su3;
use qmh::strategy::{counter_for_alice, counter_for_bob};
use qmh::{expected_payoff, Branch, InitialStateRegime, PayoffMode};

fn main() -> qmh::Result<()> {
    let e = InitialStateRegime::Entangled;
    for seed in 0..5 {
        let a = random_su3(seed)?;
        let (counter, branch) = counter_for_bob(&a);
        let bob = expected_payoff(&e, &a, &counter, branch.gamma(), PayoffMode::Incoherent)?.bob;
        println!("seed {seed}: Bob's counter to A wins with probability {bob:.12}");

        let b = random_su3(100 + seed)?;
        for branch in [Branch::Switch, Branch::Stay] {
            let counter = counter_for_alice(&b, branch);
            let bob = expected_payoff(&e, &counter, &b, branch.gamma(), PayoffMode::Incoherent)?.bob;
            println!("         Alice's counter to B ({branch:?}) leaves Bob {bob:.3e}");
        }
    }
    Ok(())
}
