//! Best responses, ε-Nash checks and the constructive no-pure-equilibrium
//! certificate for the entangled game.
//!
//! Best responses are found by multistart Nelder-Mead over the eight
//! Gell-Mann coordinates of SU(3). In incoherent mode Bob's payoff is affine
//! in `cos²γ`, so his optimum always sits on one of the two branches and the
//! search only visits `γ ∈ {0, π/2}`. Coherent-mode searches run the same
//! protocol but are flagged as exploratory.

mod simplex;

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::game::{Branch, Game, InitialStateRegime, PayoffMode};
use crate::linalg::{random_su3_with, su3_from_params, Op3, Su3Params};
use crate::strategy::{
    counter_for_alice, counter_for_bob, mixed_payoff_resolved, MixedStrategy, ResolvedMixture,
};

use simplex::{minimize, SimplexOptions};

/// Default ε for Nash verdicts.
pub const DEFAULT_EPSILON: f64 = 5e-3;
/// A constructive counter must reach at least this payoff.
pub const CERTIFICATE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Player {
    Alice,
    Bob,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    /// Random starts per `γ` branch.
    pub starts: usize,
    pub max_evals_per_start: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            starts: 32,
            max_evals_per_start: 2000,
            tolerance: 1e-10,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BestResponseResult {
    pub responder: Player,
    /// Generator coordinates of the best strategy found.
    pub strategy: Su3Params,
    pub matrix: Op3,
    /// Bob's chosen branch; `None` for Alice.
    pub gamma_branch: Option<Branch>,
    pub gamma: f64,
    /// The responder's own payoff.
    pub value: f64,
    pub bob_payoff: f64,
    pub starts: usize,
    pub evaluations: usize,
    /// Set for coherent-mode searches, which carry no equilibrium claims.
    pub exploratory: bool,
}

struct Candidate {
    theta: [f64; 8],
    objective: f64,
    evals: usize,
}

/// Runs `opts.starts` seeded local searches minimizing `objective`; start `i`
/// draws from ChaCha stream `i`, so results do not depend on thread count.
fn multistart(
    objective: &(dyn Fn(&Op3) -> f64 + Sync),
    opts: &SearchOptions,
) -> Candidate {
    let simplex_opts = SimplexOptions {
        max_evals: opts.max_evals_per_start,
        tol_x: opts.tolerance,
        tol_f: 1e-15,
        initial_step: 0.6,
    };
    let runs: Vec<Candidate> = (0..opts.starts.max(1))
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(i as u64);
            let x0: [f64; 8] = std::array::from_fn(|_| rng.random_range(-PI..PI));
            let r = minimize(
                |theta: &[f64; 8]| match su3_from_params(&Su3Params::new(*theta)) {
                    Ok(u) => objective(&u),
                    Err(_) => f64::INFINITY,
                },
                x0,
                &simplex_opts,
            );
            Candidate {
                theta: r.x,
                objective: r.f,
                evals: r.evals,
            }
        })
        .collect();
    let evals = runs.iter().map(|c| c.evals).sum();
    let best = runs
        .into_iter()
        .reduce(|a, b| if b.objective < a.objective { b } else { a })
        .expect("at least one start");
    Candidate { evals, ..best }
}

fn bob_value(game: &Game, alice: &ResolvedMixture, bob: &Op3, gamma: f64) -> f64 {
    alice
        .components
        .iter()
        .map(|(a, w)| w * game.bob_payoff_unchecked(a, bob, gamma).0)
        .sum()
}

fn alice_bob_value(game: &Game, alice: &Op3, bob: &ResolvedMixture, gamma: f64) -> f64 {
    bob.components
        .iter()
        .map(|(b, w)| w * game.bob_payoff_unchecked(alice, b, gamma).0)
        .sum()
}

/// Bob's best pure reply `(B̂, γ)` to Alice's mixture.
pub fn best_response_bob(
    regime: &InitialStateRegime,
    alice: &MixedStrategy,
    mode: PayoffMode,
    opts: &SearchOptions,
) -> Result<BestResponseResult> {
    let game = Game::new(regime.clone(), mode)?;
    let alice = alice.resolve()?;
    let mut best: Option<(Branch, Candidate)> = None;
    let mut evaluations = 0;
    for branch in [Branch::Switch, Branch::Stay] {
        let g = branch.gamma();
        let objective = |b: &Op3| -bob_value(&game, &alice, b, g);
        let cand = multistart(&objective, opts);
        evaluations += cand.evals;
        if best.as_ref().is_none_or(|(_, c)| cand.objective < c.objective) {
            best = Some((branch, cand));
        }
    }
    let (branch, cand) = best.expect("two branches searched");
    let strategy = Su3Params::new(cand.theta);
    let matrix = su3_from_params(&strategy)?;
    let value = mixed_payoff_resolved(&game, &alice, &ResolvedMixture::pure(matrix), branch.gamma())?.bob;
    Ok(BestResponseResult {
        responder: Player::Bob,
        strategy,
        matrix,
        gamma_branch: Some(branch),
        gamma: branch.gamma(),
        value,
        bob_payoff: value,
        starts: opts.starts,
        evaluations,
        exploratory: mode != PayoffMode::Incoherent,
    })
}

/// Alice's best pure reply to Bob's mixture played at `gamma`.
pub fn best_response_alice(
    regime: &InitialStateRegime,
    bob: &MixedStrategy,
    gamma: f64,
    mode: PayoffMode,
    opts: &SearchOptions,
) -> Result<BestResponseResult> {
    let game = Game::new(regime.clone(), mode)?;
    let bob = bob.resolve()?;
    // validates gamma before the search starts
    mixed_payoff_resolved(&game, &ResolvedMixture::pure(Op3::identity()), &bob, gamma)?;
    let objective = |a: &Op3| alice_bob_value(&game, a, &bob, gamma);
    let cand = multistart(&objective, opts);
    let strategy = Su3Params::new(cand.theta);
    let matrix = su3_from_params(&strategy)?;
    let bob_payoff = mixed_payoff_resolved(&game, &ResolvedMixture::pure(matrix), &bob, gamma)?.bob;
    Ok(BestResponseResult {
        responder: Player::Alice,
        strategy,
        matrix,
        gamma_branch: None,
        gamma,
        value: 1.0 - bob_payoff,
        bob_payoff,
        starts: opts.starts,
        evaluations: cand.evals,
        exploratory: mode != PayoffMode::Incoherent,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct StrategyProfile {
    pub alice: MixedStrategy,
    pub bob: MixedStrategy,
    pub gamma: f64,
}

impl StrategyProfile {
    pub fn new(alice: impl Into<MixedStrategy>, bob: impl Into<MixedStrategy>, gamma: f64) -> Self {
        StrategyProfile {
            alice: alice.into(),
            bob: bob.into(),
            gamma,
        }
    }

    pub fn label(&self) -> String {
        format!("A={}, B={}, γ={:.6}", self.alice.label(), self.bob.label(), self.gamma)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum NashVerdict {
    EpsilonNash,
    Refuted {
        player: Player,
        witness: Box<BestResponseResult>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NashReport {
    pub profile: String,
    pub bob_payoff: f64,
    pub bob_gain: f64,
    pub alice_gain: f64,
    pub epsilon: f64,
    pub verdict: NashVerdict,
    pub bob_response: BestResponseResult,
    pub alice_response: BestResponseResult,
}

impl NashReport {
    pub fn is_epsilon_nash(&self) -> bool {
        matches!(self.verdict, NashVerdict::EpsilonNash)
    }
}

/// Runs both players' best-response searches from `profile` and compares
/// each player's best deviation with what they currently earn.
pub fn verify_epsilon_nash(
    regime: &InitialStateRegime,
    profile: &StrategyProfile,
    epsilon: f64,
    mode: PayoffMode,
    opts: &SearchOptions,
) -> Result<NashReport> {
    let game = Game::new(regime.clone(), mode)?;
    let current = mixed_payoff_resolved(
        &game,
        &profile.alice.resolve()?,
        &profile.bob.resolve()?,
        profile.gamma,
    )?
    .bob;
    let bob_response = best_response_bob(regime, &profile.alice, mode, opts)?;
    let alice_response = best_response_alice(regime, &profile.bob, profile.gamma, mode, opts)?;
    let bob_gain = (bob_response.value - current).max(0.0);
    let alice_gain = (alice_response.value - (1.0 - current)).max(0.0);
    let verdict = if bob_gain.max(alice_gain) <= epsilon {
        NashVerdict::EpsilonNash
    } else if bob_gain >= alice_gain {
        NashVerdict::Refuted {
            player: Player::Bob,
            witness: Box::new(bob_response.clone()),
        }
    } else {
        NashVerdict::Refuted {
            player: Player::Alice,
            witness: Box::new(alice_response.clone()),
        }
    };
    Ok(NashReport {
        profile: profile.label(),
        bob_payoff: current,
        bob_gain,
        alice_gain,
        epsilon,
        verdict,
        bob_response,
        alice_response,
    })
}

/// Bob's payoff for every pair of mixture components: rows are Alice's
/// components, columns Bob's.
pub fn component_payoff_matrix(
    regime: &InitialStateRegime,
    alice: &MixedStrategy,
    bob: &MixedStrategy,
    gamma: f64,
    mode: PayoffMode,
) -> Result<Vec<Vec<f64>>> {
    let game = Game::new(regime.clone(), mode)?;
    let alice = alice.resolve()?;
    let bob = bob.resolve()?;
    alice
        .components
        .iter()
        .map(|(a, _)| {
            bob.components
                .iter()
                .map(|(b, _)| Ok(game.expected_payoff(a, b, gamma)?.bob))
                .collect()
        })
        .collect()
}

/// One refuted (or not) pure profile of the entangled game.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateSample {
    pub alice: Op3,
    pub bob: Op3,
    pub branch: Branch,
    pub bob_payoff: f64,
    /// Bob's payoff after replying with `Â*` and staying.
    pub bob_counter_payoff: f64,
    /// Alice's payoff after her conjugate (or shuffled conjugate) reply.
    pub alice_counter_payoff: f64,
    /// The player with the lower payoff (Bob on ties within 1e-9), who deviates.
    pub deviator: Player,
    pub refuted: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub samples: usize,
    pub refuted: usize,
    pub failures: Vec<CertificateSample>,
    pub pass: bool,
}

/// Builds both closed-form counters for `(Â, B̂, branch)` in the entangled
/// game and checks that the disadvantaged player's counter wins outright.
pub fn certify_profile(alice: &Op3, bob: &Op3, branch: Branch) -> Result<CertificateSample> {
    let game = Game::new(InitialStateRegime::Entangled, PayoffMode::Incoherent)?;
    let bob_payoff = game.expected_payoff(alice, bob, branch.gamma())?.bob;

    let (bob_counter, bob_branch) = counter_for_bob(alice);
    let bob_counter_payoff = game.expected_payoff(alice, &bob_counter, bob_branch.gamma())?.bob;

    let alice_counter = counter_for_alice(bob, branch);
    let alice_counter_payoff = 1.0 - game.expected_payoff(&alice_counter, bob, branch.gamma())?.bob;

    let alice_payoff = 1.0 - bob_payoff;
    let (deviator, counter, current) = if bob_payoff <= alice_payoff + CERTIFICATE_TOL {
        (Player::Bob, bob_counter_payoff, bob_payoff)
    } else {
        (Player::Alice, alice_counter_payoff, alice_payoff)
    };
    let refuted = counter >= 1.0 - CERTIFICATE_TOL && counter - current > CERTIFICATE_TOL;
    Ok(CertificateSample {
        alice: *alice,
        bob: *bob,
        branch,
        bob_payoff,
        bob_counter_payoff,
        alice_counter_payoff,
        deviator,
        refuted,
    })
}

/// Samples random pure profiles of the entangled game and refutes each one
/// with a closed-form counter. No optimizer is involved.
pub fn no_pure_nash_certificate(samples: usize, seed: u64) -> Result<CertificateReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    let mut refuted = 0;
    for _ in 0..samples {
        let alice = random_su3_with(&mut rng)?;
        let bob = random_su3_with(&mut rng)?;
        let branch = if rng.random_bool(0.5) {
            Branch::Switch
        } else {
            Branch::Stay
        };
        let s = certify_profile(&alice, &bob, branch)?;
        if s.refuted {
            refuted += 1;
        } else {
            failures.push(s);
        }
    }
    Ok(CertificateReport {
        samples,
        refuted,
        pass: failures.is_empty(),
        failures,
    })
}
