//! Sampled rounds: policies for both players, seeded and replayable.

use qmh::play::{run_match, AlicePolicy, BobPolicy, MatchConfig};
use qmh::{MixedStrategy, NamedStrategy};

fn main() -> qmh::Result<()> {
    let rounds = 1_000;
    let runs = [
        (
            "identity Alice vs identity Bob, staying",
            AlicePolicy::Fixed(NamedStrategy::Identity),
            BobPolicy::Fixed {
                strategy: NamedStrategy::Identity,
                gamma: std::f64::consts::FRAC_PI_2,
            },
        ),
        (
            "shuffle mixtures, switching",
            AlicePolicy::Mixed(MixedStrategy::uniform_shuffles()),
            BobPolicy::Mixed {
                mixture: MixedStrategy::uniform_shuffles(),
                gamma: 0.0,
            },
        ),
        (
            "adaptive counters on both sides",
            AlicePolicy::AdaptiveCounter,
            BobPolicy::AdaptiveCounter,
        ),
    ];
    for (name, alice, bob) in runs {
        let t = run_match(MatchConfig::default(), rounds, alice, bob, 42)?;
        println!("{name}: Bob {} - Alice {}", t.bob_points, t.alice_points);
        let last = t.rounds.last().expect("rounds > 0");
        println!(
            "  last round: (o, b, a) = ({}, {}, {}), expected {:.3}",
            last.outcome.o, last.outcome.b, last.outcome.a, last.outcome.expected_bob
        );
    }
    Ok(())
}
