//! Sampled play: Born-rule measurement of the final state and seeded,
//! replayable matches.
//!
//! Every round draws from its own ChaCha8 stream (`stream = round number`)
//! under the match seed, so a transcript can be replayed bit-exactly and
//! rounds never share random state. Within a round the draw order is fixed:
//! Alice's policy, then Bob's policy, then the branch (incoherent mode at
//! interior `γ`), then the measured ket.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{EngineError, Result};
use crate::game::{Branch, Game, InitialStateRegime, PayoffMode};
use crate::linalg::{decode_index, Op3, StateVector27, DIM};
use crate::strategy::{counter_for_alice, counter_for_bob, MixedStrategy, NamedStrategy};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameOutcome {
    /// Opened box.
    pub o: usize,
    /// Bob's final box.
    pub b: usize,
    /// Alice's box (the prize).
    pub a: usize,
    pub bob_wins: bool,
    /// Bob's expected payoff before measurement.
    pub expected_bob: f64,
    /// Branch drawn in incoherent mode; `None` in coherent mode.
    pub branch: Option<Branch>,
    /// Uniform draws consumed by this measurement, in order.
    pub draws: Vec<f64>,
}

/// Picks a basis index with probability `|amp|² / norm²`.
fn measure<R: Rng + ?Sized>(state: &StateVector27, rng: &mut R, draws: &mut Vec<f64>) -> usize {
    let total = state.norm2();
    let u: f64 = rng.random();
    draws.push(u);
    let target = u * total;
    let mut acc = 0.0;
    let mut last_nonzero = 0;
    for i in 0..DIM {
        let p = state.0[i].norm_sqr();
        if p == 0.0 {
            continue;
        }
        last_nonzero = i;
        acc += p;
        if target < acc {
            return i;
        }
    }
    last_nonzero
}

/// Samples one measured outcome for the given profile.
pub fn sample_outcome_in<R: Rng + ?Sized>(
    game: &Game,
    alice: &Op3,
    bob: &Op3,
    gamma: f64,
    rng: &mut R,
) -> Result<GameOutcome> {
    let expected_bob = game.expected_payoff(alice, bob, gamma)?.bob;
    let mut draws = Vec::with_capacity(2);
    let (state, branch) = match game.mode() {
        PayoffMode::Incoherent => {
            let branch = match Branch::from_gamma(gamma) {
                Some(b) => b,
                None => {
                    let u: f64 = rng.random();
                    draws.push(u);
                    if u < gamma.cos().powi(2) {
                        Branch::Switch
                    } else {
                        Branch::Stay
                    }
                }
            };
            let br = game.branches(alice, bob);
            let state = match branch {
                Branch::Switch => br.switch,
                Branch::Stay => br.stay,
            };
            (state, Some(branch))
        }
        PayoffMode::CoherentNormalized => (game.final_state(alice, bob, gamma)?.state, None),
    };
    let (o, b, a) = decode_index(measure(&state, rng, &mut draws));
    Ok(GameOutcome {
        o,
        b,
        a,
        bob_wins: b == a,
        expected_bob,
        branch,
        draws,
    })
}

pub fn sample_outcome<R: Rng + ?Sized>(
    regime: &InitialStateRegime,
    alice: &Op3,
    bob: &Op3,
    gamma: f64,
    mode: PayoffMode,
    rng: &mut R,
) -> Result<GameOutcome> {
    sample_outcome_in(&Game::new(regime.clone(), mode)?, alice, bob, gamma, rng)
}

/// How Alice picks her operator each round.
#[derive(Clone, Debug, PartialEq)]
pub enum AlicePolicy {
    Fixed(NamedStrategy),
    /// Resampled every round.
    Mixed(MixedStrategy),
    /// Plays the winning counter to Bob's previously revealed operator and
    /// switch choice; identity in round 1.
    AdaptiveCounter,
}

impl AlicePolicy {
    pub fn label(&self) -> String {
        match self {
            AlicePolicy::Fixed(s) => s.label(),
            AlicePolicy::Mixed(m) => m.label(),
            AlicePolicy::AdaptiveCounter => "adaptive-counter".into(),
        }
    }
}

/// How an automated Bob picks his operator and `γ` each round.
#[derive(Clone, Debug, PartialEq)]
pub enum BobPolicy {
    Fixed { strategy: NamedStrategy, gamma: f64 },
    Mixed { mixture: MixedStrategy, gamma: f64 },
    /// Plays `Â*` and stays against Alice's previously revealed operator;
    /// identity and switch in round 1.
    AdaptiveCounter,
}

impl BobPolicy {
    pub fn label(&self) -> String {
        match self {
            BobPolicy::Fixed { strategy, gamma } => format!("{strategy} γ={gamma}"),
            BobPolicy::Mixed { mixture, gamma } => format!("{} γ={gamma}", mixture.label()),
            BobPolicy::AdaptiveCounter => "adaptive-counter".into(),
        }
    }
}

fn sample_mixture<R: Rng + ?Sized>(m: &MixedStrategy, rng: &mut R) -> Result<(String, Op3)> {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let comps = m.components();
    for (s, w) in comps {
        acc += w;
        if u < acc {
            return Ok((s.label(), s.resolve()?));
        }
    }
    // u landed in rounding slack above the last cumulative weight
    let (s, _) = comps
        .iter()
        .rev()
        .find(|(_, w)| *w > 0.0)
        .expect("validated mixture has positive weight");
    Ok((s.label(), s.resolve()?))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchConfig {
    pub regime: InitialStateRegime,
    pub mode: PayoffMode,
}

impl Default for MatchConfig {
    fn default() -> Self {
        MatchConfig {
            regime: InitialStateRegime::Entangled,
            mode: PayoffMode::Incoherent,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    /// 1-based; also the RNG stream of the round.
    pub round: u64,
    pub alice_strategy: String,
    pub alice: Op3,
    pub bob_strategy: String,
    pub bob: Op3,
    pub gamma: f64,
    pub outcome: GameOutcome,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchTranscript {
    pub config: MatchConfig,
    pub seed: u64,
    pub alice_policy: String,
    pub bob_policy: String,
    pub rounds: Vec<RoundRecord>,
    pub bob_points: u64,
    pub alice_points: u64,
}

impl MatchTranscript {
    /// Scores agree with the per-round win flags.
    pub fn is_consistent(&self) -> bool {
        let wins = self.rounds.iter().filter(|r| r.outcome.bob_wins).count() as u64;
        wins == self.bob_points && self.rounds.len() as u64 - wins == self.alice_points
    }
}

/// A match in progress. Rounds can be driven by policies for both players
/// or by an externally chosen Bob move (a human at the CLI or web UI).
#[derive(Clone, Debug)]
pub struct Match {
    config: MatchConfig,
    game: Game,
    seed: u64,
    alice_policy: AlicePolicy,
    bob_label: String,
    rounds: Vec<RoundRecord>,
    bob_points: u64,
    alice_points: u64,
}

impl Match {
    pub fn new(config: MatchConfig, alice_policy: AlicePolicy, seed: u64) -> Result<Self> {
        let game = Game::new(config.regime.clone(), config.mode)?;
        Ok(Match {
            config,
            game,
            seed,
            alice_policy,
            bob_label: "human".into(),
            rounds: Vec::new(),
            bob_points: 0,
            alice_points: 0,
        })
    }

    pub fn config(&self) -> &MatchConfig {
        &self.config
    }

    pub fn game(&self) -> &Game {
        &self.game
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn alice_policy(&self) -> &AlicePolicy {
        &self.alice_policy
    }

    pub fn rounds(&self) -> &[RoundRecord] {
        &self.rounds
    }

    /// Number of the next round to be played.
    pub fn next_round(&self) -> u64 {
        self.rounds.len() as u64 + 1
    }

    pub fn scores(&self) -> (u64, u64) {
        (self.bob_points, self.alice_points)
    }

    fn round_rng(&self, round: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(round);
        rng
    }

    fn choose_alice<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(String, Op3)> {
        match &self.alice_policy {
            AlicePolicy::Fixed(s) => Ok((s.label(), s.resolve()?)),
            AlicePolicy::Mixed(m) => sample_mixture(m, rng),
            AlicePolicy::AdaptiveCounter => match self.rounds.last() {
                None => Ok(("identity".into(), Op3::identity())),
                Some(last) => {
                    let branch = if last.gamma.cos().powi(2) >= 0.5 {
                        Branch::Switch
                    } else {
                        Branch::Stay
                    };
                    let label = match branch {
                        Branch::Switch => "counter: conjugate",
                        Branch::Stay => "counter: conjugate-shuffle1",
                    };
                    Ok((label.into(), counter_for_alice(&last.bob, branch)))
                }
            },
        }
    }

    fn choose_bob<R: Rng + ?Sized>(&self, policy: &BobPolicy, rng: &mut R) -> Result<(String, Op3, f64)> {
        match policy {
            BobPolicy::Fixed { strategy, gamma } => Ok((strategy.label(), strategy.resolve()?, *gamma)),
            BobPolicy::Mixed { mixture, gamma } => {
                let (label, op) = sample_mixture(mixture, rng)?;
                Ok((label, op, *gamma))
            }
            BobPolicy::AdaptiveCounter => match self.rounds.last() {
                None => Ok(("identity".into(), Op3::identity(), Branch::Switch.gamma())),
                Some(last) => {
                    let (op, branch) = counter_for_bob(&last.alice);
                    Ok(("counter: conjugate".into(), op, branch.gamma()))
                }
            },
        }
    }

    fn finish_round(
        &mut self,
        round: u64,
        rng: &mut ChaCha8Rng,
        alice: (String, Op3),
        bob: (String, Op3),
        gamma: f64,
    ) -> Result<&RoundRecord> {
        let outcome = sample_outcome_in(&self.game, &alice.1, &bob.1, gamma, rng)?;
        if outcome.bob_wins {
            self.bob_points += 1;
        } else {
            self.alice_points += 1;
        }
        self.rounds.push(RoundRecord {
            round,
            alice_strategy: alice.0,
            alice: alice.1,
            bob_strategy: bob.0,
            bob: bob.1,
            gamma,
            outcome,
        });
        Ok(self.rounds.last().expect("just pushed"))
    }

    /// Plays a round with an automated Bob.
    pub fn play_round(&mut self, bob: &BobPolicy) -> Result<&RoundRecord> {
        let round = self.next_round();
        let mut rng = self.round_rng(round);
        let alice = self.choose_alice(&mut rng)?;
        let (label, op, gamma) = self.choose_bob(bob, &mut rng)?;
        self.bob_label = bob.label();
        self.finish_round(round, &mut rng, alice, (label, op), gamma)
    }

    /// Plays a round with an externally chosen Bob move. Invalid moves are
    /// rejected before anything is recorded.
    pub fn play_round_with(&mut self, bob: &NamedStrategy, gamma: f64) -> Result<&RoundRecord> {
        let op = bob.resolve()?;
        self.game.expected_payoff(&Op3::identity(), &op, gamma)?;
        let round = self.next_round();
        let mut rng = self.round_rng(round);
        let alice = self.choose_alice(&mut rng)?;
        self.finish_round(round, &mut rng, alice, (bob.label(), op), gamma)
    }

    pub fn transcript(&self) -> MatchTranscript {
        MatchTranscript {
            config: self.config.clone(),
            seed: self.seed,
            alice_policy: self.alice_policy.label(),
            bob_policy: self.bob_label.clone(),
            rounds: self.rounds.clone(),
            bob_points: self.bob_points,
            alice_points: self.alice_points,
        }
    }
}

/// Plays `rounds` rounds between two automated policies.
pub fn run_match(
    config: MatchConfig,
    rounds: u64,
    alice: AlicePolicy,
    bob: BobPolicy,
    seed: u64,
) -> Result<MatchTranscript> {
    if rounds == 0 {
        return Err(EngineError::InvalidArgument("a match needs at least one round".into()));
    }
    let mut m = Match::new(config, alice, seed)?;
    for _ in 0..rounds {
        m.play_round(&bob)?;
    }
    Ok(m.transcript())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::expected_payoff;
    use crate::linalg::random_su3;
    use std::f64::consts::FRAC_PI_2;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn entangled() -> MatchConfig {
        MatchConfig::default()
    }

    fn unentangled() -> MatchConfig {
        MatchConfig {
            regime: InitialStateRegime::Unentangled,
            mode: PayoffMode::Incoherent,
        }
    }

    #[test]
    fn correlated_stay_always_wins() {
        let i = Op3::identity();
        let mut r = rng(1);
        for _ in 0..500 {
            let out = sample_outcome(&InitialStateRegime::Entangled, &i, &i, FRAC_PI_2, PayoffMode::Incoherent, &mut r)
                .unwrap();
            assert!(out.bob_wins);
            assert_eq!(out.b, out.a);
        }
    }

    #[test]
    fn conjugate_counter_always_wins() {
        let mut r = rng(2);
        for seed in 0..200 {
            let a = random_su3(seed).unwrap();
            let out = sample_outcome(
                &InitialStateRegime::Entangled,
                &a,
                &a.conj(),
                FRAC_PI_2,
                PayoffMode::Incoherent,
                &mut r,
            )
            .unwrap();
            assert!(out.bob_wins);
        }
    }

    #[test]
    fn sampled_kets_have_support() {
        let game = Game::new(InitialStateRegime::Unentangled, PayoffMode::CoherentNormalized).unwrap();
        let a = random_su3(5).unwrap();
        let b = random_su3(6).unwrap();
        let f = game.final_state(&a, &b, 0.7).unwrap();
        let mut r = rng(3);
        for _ in 0..1000 {
            let out = sample_outcome_in(&game, &a, &b, 0.7, &mut r).unwrap();
            let idx = crate::linalg::basis_index(out.o, out.b, out.a);
            assert!(f.state[idx].norm() > 0.0);
            assert_eq!(out.branch, None);
        }
    }

    #[test]
    fn classical_switch_frequency() {
        let i = Op3::identity();
        let game = Game::new(InitialStateRegime::Unentangled, PayoffMode::Incoherent).unwrap();
        let mut r = rng(4);
        let n = 100_000;
        let wins = (0..n)
            .filter(|_| sample_outcome_in(&game, &i, &i, 0.0, &mut r).unwrap().bob_wins)
            .count();
        assert!((wins as f64 / n as f64 - 2.0 / 3.0).abs() < 0.01);
    }

    fn within_four_sigma(wins: usize, n: usize, p: f64) -> bool {
        let freq = wins as f64 / n as f64;
        (freq - p).abs() <= 4.0 * (p * (1.0 - p) / n as f64).sqrt() + 1e-12
    }

    #[test]
    fn frequencies_track_expectation() {
        let n = 10_000;
        let mut hits = 0;
        let trials = 100;
        for t in 0..trials {
            let a = random_su3(1000 + t).unwrap();
            let b = random_su3(2000 + t).unwrap();
            let g = 0.5;
            let regime = if t % 2 == 0 { InitialStateRegime::Entangled } else { InitialStateRegime::Unentangled };
            let game = Game::new(regime.clone(), PayoffMode::Incoherent).unwrap();
            let p = expected_payoff(&regime, &a, &b, g, PayoffMode::Incoherent).unwrap().bob;
            let mut r = rng(t);
            let wins = (0..n)
                .filter(|_| sample_outcome_in(&game, &a, &b, g, &mut r).unwrap().bob_wins)
                .count();
            if within_four_sigma(wins, n, p) {
                hits += 1;
            }
        }
        assert!(hits >= 99, "{hits}/{trials}");
    }

    #[test]
    fn interior_gamma_branch_sampling_is_affine() {
        let a = random_su3(50).unwrap();
        let b = random_su3(51).unwrap();
        let regime = InitialStateRegime::Entangled;
        let inc = PayoffMode::Incoherent;
        let g: f64 = 1.0;
        let p0 = expected_payoff(&regime, &a, &b, 0.0, inc).unwrap().bob;
        let p1 = expected_payoff(&regime, &a, &b, FRAC_PI_2, inc).unwrap().bob;
        let p = g.cos().powi(2) * p0 + g.sin().powi(2) * p1;
        let game = Game::new(regime, inc).unwrap();
        let mut r = rng(9);
        let n = 20_000;
        let mut switches = 0;
        let mut wins = 0;
        for _ in 0..n {
            let out = sample_outcome_in(&game, &a, &b, g, &mut r).unwrap();
            assert_eq!(out.draws.len(), 2);
            if out.branch == Some(Branch::Switch) {
                switches += 1;
            }
            if out.bob_wins {
                wins += 1;
            }
        }
        assert!(within_four_sigma(switches, n, g.cos().powi(2)));
        assert!(within_four_sigma(wins, n, p));
    }

    #[test]
    fn shuffle_mixtures_match_two_thirds() {
        let m = MixedStrategy::uniform_shuffles();
        let t = run_match(
            entangled(),
            300,
            AlicePolicy::Mixed(m.clone()),
            BobPolicy::Mixed { mixture: m, gamma: 0.0 },
            11,
        )
        .unwrap();
        let p: f64 = 2.0 / 3.0;
        let sigma = (p * (1.0 - p) / 300.0).sqrt();
        assert!((t.bob_points as f64 / 300.0 - p).abs() <= 3.0 * sigma);
        assert!(t.is_consistent());
    }

    #[test]
    fn matches_replay_bit_exactly() {
        let run = || {
            run_match(
                unentangled(),
                25,
                AlicePolicy::Mixed(MixedStrategy::uniform_shuffles()),
                BobPolicy::Fixed {
                    strategy: NamedStrategy::FairH,
                    gamma: 0.4,
                },
                99,
            )
            .unwrap()
        };
        let (a, b) = (run(), run());
        assert_eq!(a, b);
        let json = serde_json::to_string(&a).unwrap();
        assert_eq!(json, serde_json::to_string(&b).unwrap());
        let back: MatchTranscript = serde_json::from_str(&json).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn single_round_is_deterministic() {
        let go = || {
            run_match(
                entangled(),
                1,
                AlicePolicy::Fixed(NamedStrategy::FairH),
                BobPolicy::Fixed {
                    strategy: NamedStrategy::Identity,
                    gamma: 0.0,
                },
                5,
            )
            .unwrap()
        };
        assert_eq!(go(), go());
    }

    #[test]
    fn adaptive_alice_shuts_out_static_bob() {
        let u = random_su3(77).unwrap();
        let t = run_match(
            entangled(),
            50,
            AlicePolicy::AdaptiveCounter,
            BobPolicy::Fixed {
                strategy: NamedStrategy::Matrix(u),
                gamma: 0.0,
            },
            3,
        )
        .unwrap();
        assert!(t.rounds[1..].iter().all(|r| !r.outcome.bob_wins));
        assert!(t.rounds[1..].iter().all(|r| r.outcome.expected_bob < 1e-12));
    }

    #[test]
    fn adaptive_bob_beats_static_alice() {
        let t = run_match(
            entangled(),
            20,
            AlicePolicy::Fixed(NamedStrategy::FairH),
            BobPolicy::AdaptiveCounter,
            8,
        )
        .unwrap();
        assert!(t.rounds[1..].iter().all(|r| r.outcome.bob_wins));
    }

    #[test]
    fn human_moves_are_validated_first() {
        let mut m = Match::new(entangled(), AlicePolicy::Fixed(NamedStrategy::Identity), 1).unwrap();
        let bad = NamedStrategy::Matrix(Op3::from_real([[2.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]));
        assert!(m.play_round_with(&bad, 0.0).is_err());
        assert!(m.play_round_with(&NamedStrategy::Identity, 3.0).is_err());
        assert_eq!(m.next_round(), 1);
        for _ in 0..5 {
            assert!(m.play_round_with(&NamedStrategy::Identity, FRAC_PI_2).unwrap().outcome.bob_wins);
        }
        assert_eq!(m.scores(), (5, 0));
    }

    #[test]
    fn zero_rounds_rejected() {
        assert!(run_match(
            entangled(),
            0,
            AlicePolicy::AdaptiveCounter,
            BobPolicy::AdaptiveCounter,
            0
        )
        .is_err());
    }
}
