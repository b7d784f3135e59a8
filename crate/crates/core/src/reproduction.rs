//! The claim-by-claim verification suite.
//!
//! Each claim recomputes one published payoff or equilibrium statement from
//! scratch through the public API and compares it with the expected value
//! at a fixed tolerance. Claims draw randomness from ChaCha stream
//! `claim id` of the run seed, so a single claim can be rerun on its own and
//! gets the same samples it gets inside the full suite.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4};
use std::fmt;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closed_form::{oracle_match, ClosedFormInput, ClosedFormRegime, ORACLE_TOL};
use crate::equilibrium::{
    best_response_bob, no_pure_nash_certificate, verify_epsilon_nash, SearchOptions,
    StrategyProfile, DEFAULT_EPSILON,
};
use crate::error::{EngineError, Result};
use crate::game::{
    build_open_operator, build_switch_operator, final_state_via_operators, initial_state, Game,
    InitialStateRegime, PayoffMode,
};
use crate::linalg::{random_su3_with, Op3, Op27, StateVector27, DIM};
use crate::play::{run_match, AlicePolicy, BobPolicy, MatchConfig};
use crate::strategy::{
    counter_for_alice, counter_for_bob, fair_h, mixed_payoff, shuffle1, shuffle2, MixedStrategy,
    NamedStrategy,
};

/// Claim ids run by [`verify_all`].
pub const CLAIM_IDS: [u8; 11] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11];

const EXACT_TOL: f64 = 1e-12;
const SAMPLE_TOL: f64 = 1e-9;
const SIGMAS: f64 = 4.0;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Fewer samples, rounds and search starts. Verdicts are expected to be
    /// the same; statistical confidence is lower.
    pub quick: bool,
    /// Replaces Alice's fair operator in the fair-game claim. Only useful as
    /// a negative control.
    pub fair_h_override: Option<Op3>,
}

impl VerifyOptions {
    fn samples(&self, full: usize) -> usize {
        if self.quick {
            (full / 4).max(20)
        } else {
            full
        }
    }

    fn starts(&self) -> usize {
        if self.quick {
            8
        } else {
            32
        }
    }

    fn rng(&self, claim: u8) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(claim as u64);
        rng
    }

    fn search(&self, claim: u8) -> SearchOptions {
        SearchOptions {
            starts: self.starts(),
            seed: self.seed.wrapping_add(claim as u64),
            ..SearchOptions::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClaimResult {
    pub id: u8,
    pub title: String,
    /// Where the statement lives, as a short description of the result.
    pub location: String,
    pub expected: String,
    pub computed: String,
    pub tolerance: f64,
    /// Largest deviation observed against `expected`.
    pub deviation: f64,
    pub pass: bool,
    pub note: Option<String>,
    pub elapsed_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub seed: u64,
    pub quick: bool,
    pub claims: Vec<ClaimResult>,
    pub elapsed_ms: u64,
}

impl VerificationReport {
    pub fn all_pass(&self) -> bool {
        self.claims.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ClaimResult> {
        self.claims.iter().filter(|c| !c.pass)
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:>2}  {:<34} {:<40} {:<34} {:<50} {:>6}  verdict",
            "id", "claim", "location", "expected", "computed", "tol"
        )?;
        for c in &self.claims {
            writeln!(
                f,
                "{:>2}  {:<34} {:<40} {:<34} {:<50} {:>6.0e}  {}",
                c.id,
                c.title,
                c.location,
                c.expected,
                c.computed,
                c.tolerance,
                if c.pass { "PASS" } else { "FAIL" }
            )?;
            if let Some(note) = &c.note {
                writeln!(f, "    note: {note}")?;
            }
        }
        let passed = self.claims.iter().filter(|c| c.pass).count();
        write!(
            f,
            "{passed}/{} claims pass (seed {}, {} ms)",
            self.claims.len(),
            self.seed,
            self.elapsed_ms
        )?;
        if self.quick {
            write!(f, "; quick run, reduced sample counts")?;
        }
        Ok(())
    }
}

/// Runs every claim. Claims run in parallel; the report keeps id order.
pub fn verify_all(opts: &VerifyOptions) -> VerificationReport {
    let start = Instant::now();
    let claims = CLAIM_IDS
        .par_iter()
        .map(|&id| verify_claim(id, opts).expect("id from CLAIM_IDS"))
        .collect();
    VerificationReport {
        seed: opts.seed,
        quick: opts.quick,
        claims,
        elapsed_ms: start.elapsed().as_millis() as u64,
    }
}

/// Runs one claim. An engine error inside a claim is reported as a failed
/// claim; only an unknown id is an `Err`.
pub fn verify_claim(id: u8, opts: &VerifyOptions) -> Result<ClaimResult> {
    let (title, location) = describe(id)?;
    let start = Instant::now();
    let outcome = match id {
        1 => classical_baseline(),
        2 => strategy_independence(opts),
        3 => fair_game(opts),
        4 => quantum_bob_vs_classical_alice(),
        5 => counter_identities(opts),
        6 => no_pure_nash(opts),
        7 => mixed_equilibrium(opts),
        8 => unentangled_nash(opts),
        9 => oracle_equivalence(opts),
        10 => operator_structure(opts),
        11 => sampling_consistency(opts),
        _ => unreachable!("describe rejects unknown ids"),
    };
    let elapsed_ms = start.elapsed().as_millis() as u64;
    let c = match outcome {
        Ok(c) => c,
        Err(e) => Check {
            expected: "no engine error".into(),
            computed: format!("{}: {e}", e.code()),
            tolerance: 0.0,
            deviation: f64::INFINITY,
            pass: false,
            note: None,
        },
    };
    let note = match (c.note, opts.quick) {
        (Some(n), true) => Some(format!("{n}; quick run")),
        (None, true) if matches!(id, 2 | 5 | 6 | 8 | 9 | 11) => Some("quick run, reduced samples".into()),
        (n, _) => n,
    };
    Ok(ClaimResult {
        id,
        title: title.into(),
        location: location.into(),
        expected: c.expected,
        computed: c.computed,
        tolerance: c.tolerance,
        deviation: c.deviation,
        pass: c.pass,
        note,
        elapsed_ms,
    })
}

fn describe(id: u8) -> Result<(&'static str, &'static str)> {
    Ok(match id {
        1 => ("classical baseline", "unentangled payoff, classical mixture"),
        2 => ("strategy independence", "unentangled payoff, unitarity argument"),
        3 => ("fair game via H", "entangled game, Alice plays H"),
        4 => ("quantum Bob beats classical Alice", "entangled game, classical Alice"),
        5 => ("counterstrategy identities", "entangled game, conjugate counters"),
        6 => ("no pure Nash equilibrium", "entangled game, pure strategies"),
        7 => ("mixed equilibrium", "entangled game, uniform shuffle mixture"),
        8 => ("unentangled Nash equilibrium", "unentangled game, classical profile"),
        9 => ("closed-form oracle equivalence", "closed-form payoffs, both regimes"),
        10 => ("operator structure", "open and switch operators"),
        11 => ("sampling consistency", "measured outcome frequencies"),
        _ => return Err(EngineError::InvalidArgument(format!("no claim with id {id}"))),
    })
}

struct Check {
    expected: String,
    computed: String,
    tolerance: f64,
    deviation: f64,
    pass: bool,
    note: Option<String>,
}

impl Check {
    /// Passes when `deviation <= tolerance`.
    fn within(expected: impl Into<String>, computed: impl Into<String>, tolerance: f64, deviation: f64) -> Self {
        Check {
            expected: expected.into(),
            computed: computed.into(),
            tolerance,
            deviation,
            pass: deviation <= tolerance,
            note: None,
        }
    }

    fn note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

fn classical_value(gamma: f64) -> f64 {
    2.0 / 3.0 * gamma.cos().powi(2) + 1.0 / 3.0 * gamma.sin().powi(2)
}

fn bob(regime: InitialStateRegime, a: &Op3, b: &Op3, gamma: f64) -> Result<f64> {
    Ok(crate::game::expected_payoff(&regime, a, b, gamma, PayoffMode::Incoherent)?.bob)
}

fn classical_baseline() -> Result<Check> {
    let i = Op3::identity();
    let u = InitialStateRegime::Unentangled;
    let at_switch = bob(u.clone(), &i, &i, 0.0)?;
    let at_stay = bob(u.clone(), &i, &i, FRAC_PI_2)?;
    let mut worst = (at_switch - 2.0 / 3.0).abs().max((at_stay - 1.0 / 3.0).abs());
    for k in 0..20 {
        let g = FRAC_PI_2 * k as f64 / 19.0;
        worst = worst.max((bob(u.clone(), &i, &i, g)? - classical_value(g)).abs());
    }
    Ok(Check::within(
        "2/3 (switch), 1/3 (stay)",
        format!("{at_switch:.12}, {at_stay:.12}"),
        EXACT_TOL,
        worst,
    )
    .note("also (2/3)cos²γ + (1/3)sin²γ on 20 grid points"))
}

fn strategy_independence(opts: &VerifyOptions) -> Result<Check> {
    let n = opts.samples(200);
    let mut rng = opts.rng(2);
    let i = Op3::identity();
    let u = InitialStateRegime::Unentangled;
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let x = random_su3_with(&mut rng)?;
        let g = rng.random_range(0.0..=FRAC_PI_2);
        for gamma in [0.0, FRAC_PI_2, g] {
            let want = classical_value(gamma);
            worst = worst.max((bob(u.clone(), &x, &i, gamma)? - want).abs());
            worst = worst.max((bob(u.clone(), &i, &x, gamma)? - want).abs());
        }
    }
    Ok(Check::within(
        "classical value",
        format!("max |Δ| = {worst:.1e} over {n}+{n} operators"),
        SAMPLE_TOL,
        worst,
    ))
}

fn fair_game(opts: &VerifyOptions) -> Result<Check> {
    let h = opts.fair_h_override.unwrap_or_else(fair_h);
    let i = Op3::identity();
    let mut values = Vec::new();
    for g in [0.0, FRAC_PI_4, FRAC_PI_2] {
        values.push(bob(InitialStateRegime::Entangled, &h, &i, g)?);
    }
    let worst = values.iter().map(|v| (v - 0.5).abs()).fold(0.0, f64::max);
    let check = Check::within(
        "1/2 at γ = 0, π/4, π/2",
        values.iter().map(|v| format!("{v:.10}")).collect::<Vec<_>>().join(", "),
        SAMPLE_TOL,
        worst,
    );
    Ok(match opts.fair_h_override {
        Some(_) => check.note("H replaced by a caller-supplied operator"),
        None => check,
    })
}

fn quantum_bob_vs_classical_alice() -> Result<Check> {
    let i = Op3::identity();
    let e = InitialStateRegime::Entangled;
    let stay = bob(e.clone(), &i, &i, FRAC_PI_2)?;
    let m1 = bob(e.clone(), &i, &shuffle1(), 0.0)?;
    let m2 = bob(e, &i, &shuffle2(), 0.0)?;
    let worst = [stay, m1, m2].iter().map(|v| (1.0 - v).abs()).fold(0.0, f64::max);
    Ok(Check::within(
        "1 (I stay, M1 switch, M2 switch)",
        format!("{stay:.12}, {m1:.12}, {m2:.12}"),
        EXACT_TOL,
        worst,
    ))
}

fn counter_identities(opts: &VerifyOptions) -> Result<Check> {
    let n = opts.samples(200);
    let mut rng = opts.rng(5);
    let e = InitialStateRegime::Entangled;
    let (mut bob_worst, mut alice_worst): (f64, f64) = (0.0, 0.0);
    for _ in 0..n {
        let a = random_su3_with(&mut rng)?;
        let (counter, branch) = counter_for_bob(&a);
        bob_worst = bob_worst.max(1.0 - bob(e.clone(), &a, &counter, branch.gamma())?);
    }
    for _ in 0..n {
        let b = random_su3_with(&mut rng)?;
        for branch in [crate::game::Branch::Switch, crate::game::Branch::Stay] {
            let counter = counter_for_alice(&b, branch);
            alice_worst = alice_worst.max(bob(e.clone(), &counter, &b, branch.gamma())?);
        }
    }
    Ok(Check::within(
        "Bob 1 with A*; Bob 0 vs Alice counter",
        format!("Δ = {bob_worst:.1e} / {alice_worst:.1e}"),
        SAMPLE_TOL,
        bob_worst.max(alice_worst),
    )
    .note(format!("{n} random opponents per direction, Alice's counter on both branches")))
}

fn no_pure_nash(opts: &VerifyOptions) -> Result<Check> {
    let n = opts.samples(500);
    let rep = no_pure_nash_certificate(n, opts.seed.wrapping_add(6))?;
    let failures = rep.failures.len();
    let mut c = Check::within(
        format!("{n}/{n} profiles refuted"),
        format!("{}/{n} refuted, {failures} failures", rep.refuted),
        0.0,
        failures as f64,
    );
    c.pass = rep.pass && rep.refuted == n;
    Ok(c)
}

fn mixed_equilibrium(opts: &VerifyOptions) -> Result<Check> {
    let e = InitialStateRegime::Entangled;
    let mix = MixedStrategy::uniform_shuffles();
    let at_switch = mixed_payoff(&e, &mix, &mix, 0.0, PayoffMode::Incoherent)?.bob;
    let at_stay = mixed_payoff(&e, &mix, &mix, FRAC_PI_2, PayoffMode::Incoherent)?.bob;
    let exact = (at_switch - 2.0 / 3.0).abs().max((at_stay - 1.0 / 3.0).abs());
    let profile = StrategyProfile::new(mix.clone(), mix, 0.0);
    let rep = verify_epsilon_nash(&e, &profile, DEFAULT_EPSILON, PayoffMode::Incoherent, &opts.search(7))?;
    let gain = rep.bob_gain.max(rep.alice_gain);
    let pass = exact <= EXACT_TOL && gain <= DEFAULT_EPSILON;
    Ok(Check {
        expected: "2/3, 1/3; gains ≤ 5e-3".into(),
        computed: format!(
            "{at_switch:.12}, {at_stay:.12}; gains {:.1e}/{:.1e}",
            rep.bob_gain, rep.alice_gain
        ),
        tolerance: DEFAULT_EPSILON,
        deviation: gain.max(exact),
        pass,
        note: Some(format!("enumerated values to {EXACT_TOL:.0e}; {} search starts", opts.starts())),
    })
}

fn unentangled_nash(opts: &VerifyOptions) -> Result<Check> {
    let u = InitialStateRegime::Unentangled;
    let profile = StrategyProfile::new(NamedStrategy::Identity, NamedStrategy::Identity, 0.0);
    let search = opts.search(8);
    let rep = verify_epsilon_nash(&u, &profile, DEFAULT_EPSILON, PayoffMode::Incoherent, &search)?;
    let br = best_response_bob(
        &u,
        &MixedStrategy::pure(NamedStrategy::Identity),
        PayoffMode::Incoherent,
        &search,
    )?;
    let bound = 2.0 / 3.0 + 2e-3;
    let pass = rep.is_epsilon_nash() && br.value <= bound;
    Ok(Check {
        expected: "ε-Nash; Bob BR ≤ 2/3 + 2e-3".into(),
        computed: format!(
            "{}; Bob BR {:.9}",
            if rep.is_epsilon_nash() { "ε-Nash" } else { "refuted" },
            br.value
        ),
        tolerance: DEFAULT_EPSILON,
        deviation: rep.bob_gain.max(rep.alice_gain),
        pass,
        note: Some(format!("{} search starts per branch", search.starts)),
    })
}

fn oracle_equivalence(opts: &VerifyOptions) -> Result<Check> {
    let n = opts.samples(500);
    let mut rng = opts.rng(9);
    let mut worst: f64 = 0.0;
    for regime in [ClosedFormRegime::Unentangled, ClosedFormRegime::Entangled] {
        for _ in 0..n {
            let a = random_su3_with(&mut rng)?;
            let b = random_su3_with(&mut rng)?;
            let g = rng.random_range(0.0..=FRAC_PI_2);
            let rep = oracle_match(&ClosedFormInput::new(a, b, g, regime)?, PayoffMode::Incoherent)?;
            worst = worst.max(rep.difference);
        }
    }
    Ok(Check::within(
        "closed form = engine",
        format!("max |Δ| = {worst:.1e} over {n} per regime"),
        ORACLE_TOL,
        worst,
    ))
}

fn random_state(rng: &mut ChaCha8Rng) -> StateVector27 {
    let mut s = StateVector27::zero();
    for k in 0..DIM {
        s[k] = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
    }
    s.normalized().expect("a Gaussian draw is nonzero")
}

fn operator_structure(opts: &VerifyOptions) -> Result<Check> {
    let open = build_open_operator();
    let switch = build_switch_operator();
    let bijective = open.is_permutation() && switch.is_permutation();
    let involution = switch.compose(&switch).as_permutation() == Op27::identity().as_permutation();

    let mut rng = opts.rng(10);
    let mut worst: f64 = 0.0;
    for _ in 0..opts.samples(100) {
        let s = random_state(&mut rng);
        worst = worst.max((open.apply(&s).norm2() - 1.0).abs());
        worst = worst.max((switch.apply(&s).norm2() - 1.0).abs());
    }
    // whole pipeline on both branches, both regimes
    for regime in [InitialStateRegime::Unentangled, InitialStateRegime::Entangled] {
        let game = Game::new(regime.clone(), PayoffMode::Incoherent)?;
        let init = initial_state(&regime)?;
        for _ in 0..opts.samples(40) {
            let a = random_su3_with(&mut rng)?;
            let b = random_su3_with(&mut rng)?;
            let br = game.branches(&a, &b);
            worst = worst.max((br.switch.norm2() - 1.0).abs());
            worst = worst.max((br.stay.norm2() - 1.0).abs());
            let via_ops = final_state_via_operators(&init, &a, &b, 0.0);
            worst = worst.max(via_ops.max_abs_diff(&br.switch));
        }
    }
    let mut c = Check::within(
        "permutations, S² = I, norm kept",
        format!(
            "bijective: {bijective}, S² = I: {involution}, max |Δ| = {worst:.1e}"
        ),
        EXACT_TOL,
        worst,
    );
    c.pass = c.pass && bijective && involution;
    Ok(c)
}

fn sampling_consistency(opts: &VerifyOptions) -> Result<Check> {
    let rounds = if opts.quick { 2_000 } else { 10_000 };
    let mut rng = opts.rng(11);
    let random_alice = random_su3_with(&mut rng)?;
    let profiles: Vec<(&str, InitialStateRegime, AlicePolicy, BobPolicy)> = vec![
        (
            "U I/I switch",
            InitialStateRegime::Unentangled,
            AlicePolicy::Fixed(NamedStrategy::Identity),
            BobPolicy::Fixed {
                strategy: NamedStrategy::Identity,
                gamma: 0.0,
            },
        ),
        (
            "U A/I γ=π/3",
            InitialStateRegime::Unentangled,
            AlicePolicy::Fixed(NamedStrategy::Matrix(random_alice)),
            BobPolicy::Fixed {
                strategy: NamedStrategy::Identity,
                gamma: FRAC_PI_3,
            },
        ),
        (
            "E H/I γ=π/4",
            InitialStateRegime::Entangled,
            AlicePolicy::Fixed(NamedStrategy::FairH),
            BobPolicy::Fixed {
                strategy: NamedStrategy::Identity,
                gamma: FRAC_PI_4,
            },
        ),
        (
            "E I/I stay",
            InitialStateRegime::Entangled,
            AlicePolicy::Fixed(NamedStrategy::Identity),
            BobPolicy::Fixed {
                strategy: NamedStrategy::Identity,
                gamma: FRAC_PI_2,
            },
        ),
        (
            "E mix/mix switch",
            InitialStateRegime::Entangled,
            AlicePolicy::Mixed(MixedStrategy::uniform_shuffles()),
            BobPolicy::Mixed {
                mixture: MixedStrategy::uniform_shuffles(),
                gamma: 0.0,
            },
        ),
    ];

    let mut worst_z: f64 = 0.0;
    let mut parts = Vec::new();
    let mut pass = true;
    for (k, (name, regime, alice, bob_policy)) in profiles.into_iter().enumerate() {
        let p = expected_for(&regime, &alice, &bob_policy)?;
        let config = MatchConfig {
            regime,
            mode: PayoffMode::Incoherent,
        };
        let t = run_match(config, rounds, alice, bob_policy, opts.seed.wrapping_add(1_000 + k as u64))?;
        let freq = t.bob_points as f64 / rounds as f64;
        let sigma = (p * (1.0 - p) / rounds as f64).sqrt();
        let dev = (freq - p).abs();
        // a deterministic outcome has σ = 0 and must be hit exactly
        let z = if sigma > 0.0 {
            dev / sigma
        } else if dev == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        pass &= z <= SIGMAS && t.is_consistent();
        worst_z = worst_z.max(z);
        parts.push(format!("{name}: {freq:.4} vs {p:.4}"));
    }
    Ok(Check {
        expected: "|freq − p| ≤ 4σ".into(),
        computed: format!("max {worst_z:.2}σ"),
        tolerance: SIGMAS,
        deviation: worst_z,
        pass,
        note: Some(format!("{rounds} rounds each; {}", parts.join("; "))),
    })
}

fn expected_for(regime: &InitialStateRegime, alice: &AlicePolicy, bob: &BobPolicy) -> Result<f64> {
    let alice = match alice {
        AlicePolicy::Fixed(s) => MixedStrategy::pure(s.clone()),
        AlicePolicy::Mixed(m) => m.clone(),
        AlicePolicy::AdaptiveCounter => {
            return Err(EngineError::InvalidArgument("adaptive policies have no fixed expectation".into()))
        }
    };
    let (bob, gamma) = match bob {
        BobPolicy::Fixed { strategy, gamma } => (MixedStrategy::pure(strategy.clone()), *gamma),
        BobPolicy::Mixed { mixture, gamma } => (mixture.clone(), *gamma),
        BobPolicy::AdaptiveCounter => {
            return Err(EngineError::InvalidArgument("adaptive policies have no fixed expectation".into()))
        }
    };
    Ok(mixed_payoff(regime, &alice, &bob, gamma, PayoffMode::Incoherent)?.bob)
}
