//! The uniform mixture over {I, M1, M2} is an equilibrium of the entangled
//! game: Bob wins two times in three by switching and no pure deviation by
//! either side does better.

use qmh::equilibrium::{
    component_payoff_matrix, no_pure_nash_certificate, verify_epsilon_nash, SearchOptions,
    StrategyProfile, DEFAULT_EPSILON,
};
use qmh::strategy::mixed_payoff;
use qmh::{InitialStateRegime, MixedStrategy, PayoffMode};

fn main() -> qmh::Result<()> {
    let e = InitialStateRegime::Entangled;
    let inc = PayoffMode::Incoherent;
    let mix = MixedStrategy::uniform_shuffles();

    println!("Bob's payoff per component pair, switching:");
    for row in component_payoff_matrix(&e, &mix, &mix, 0.0, inc)? {
        println!("  {row:.3?}");
    }
    for g in [0.0, std::f64::consts::FRAC_PI_2] {
        println!("mixture vs mixture, gamma {g:.4}: {:.12}", mixed_payoff(&e, &mix, &mix, g, inc)?.bob);
    }

    let profile = StrategyProfile::new(mix.clone(), mix, 0.0);
    let rep = verify_epsilon_nash(&e, &profile, DEFAULT_EPSILON, inc, &SearchOptions::default())?;
    println!(
        "{}: Bob gain {:.2e}, Alice gain {:.2e}, epsilon-Nash {}",
        rep.profile,
        rep.bob_gain,
        rep.alice_gain,
        rep.is_epsilon_nash()
    );

    let cert = no_pure_nash_certificate(500, 1)?;
    println!("pure profiles refuted: {}/{}", cert.refuted, cert.samples);
    Ok(())
}
