//! Named strategies, counterstrategies and classical mixtures.
//!
//! Matrices are stored in the crate's column convention (`op[i][j]` sends
//! `|j⟩` to `|i⟩`), entered exactly as the shuffles and the fair operator are
//! usually printed. Two consequences of that convention:
//!
//! * the stay-defeating counter to Bob's `B̂` is `M̂ · B̂*` (shuffle applied
//!   after the conjugate), and
//! * Alice's fair reply to `B̂` is `Ĥ · B̂*`.
//!
//! Both are checked by the property tests below, which are the arbiter for
//! composition order.
//!
//! A note on the "`γ = 1`" wording sometimes used for Bob's stay strategy:
//! `γ` lives in `[0, π/2]`, and the only reading under which the shuffled
//! conjugate wins outright is the pure stay branch `γ = π/2`, which is what
//! [`counter_for_alice`] assumes.

use std::fmt;
use std::sync::LazyLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{EngineError, Result};
use crate::game::{Branch, Game, InitialStateRegime, PayoffMode, PayoffResult};
use crate::linalg::{su3_from_params, Op3, Su3Params, UNITARY_TOL};

const WEIGHT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Shuffle {
    #[serde(rename = "shuffle1")]
    One,
    #[serde(rename = "shuffle2")]
    Two,
}

impl Shuffle {
    pub fn matrix(self) -> Op3 {
        match self {
            Shuffle::One => shuffle1(),
            Shuffle::Two => shuffle2(),
        }
    }
}

/// `M̂₁`: sends `|0⟩ → |2⟩`, `|1⟩ → |0⟩`, `|2⟩ → |1⟩`.
pub fn shuffle1() -> Op3 {
    Op3::from_real([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])
}

/// `M̂₂ = M̂₁²`.
pub fn shuffle2() -> Op3 {
    Op3::from_real([[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
}

static FAIR_H: LazyLock<Op3> = LazyLock::new(|| {
    let r2 = 2f64.sqrt();
    let s7 = 7f64.sqrt();
    let c = Complex64::new;
    Op3([
        [c(1.0 / r2, 0.0), c(0.5, 0.0), c(0.5, 0.0)],
        [
            c(-0.5, 0.0),
            c(3.0 / (4.0 * r2), -s7 / (4.0 * r2)),
            c(1.0 / (4.0 * r2), s7 / (4.0 * r2)),
        ],
        [
            c(-1.0 / (4.0 * r2), -s7 / (4.0 * r2)),
            c(-3.0 / 8.0, s7 / 8.0),
            c(5.0 / 8.0, s7 / 8.0),
        ],
    ])
});

/// Alice's fair operator: diagonal entries of modulus `1/√2`, off-diagonal
/// entries of modulus `1/2`. Against `B̂ = Î` in the entangled game it
/// gives both players `1/2` on either branch.
pub fn fair_h() -> Op3 {
    *FAIR_H
}

/// A strategy that resolves to a single SU(3) matrix.
#[derive(Clone, Debug, PartialEq)]
pub enum NamedStrategy {
    Identity,
    Shuffle1,
    Shuffle2,
    FairH,
    /// Entrywise complex conjugate of the inner strategy.
    Conjugate(Box<NamedStrategy>),
    /// `M̂ · X*`.
    ConjugateShuffled(Box<NamedStrategy>, Shuffle),
    Params(Su3Params),
    Matrix(Op3),
}

impl NamedStrategy {
    pub fn conjugate(of: NamedStrategy) -> Self {
        NamedStrategy::Conjugate(Box::new(of))
    }

    pub fn conjugate_shuffled(of: NamedStrategy, which: Shuffle) -> Self {
        NamedStrategy::ConjugateShuffled(Box::new(of), which)
    }

    pub fn resolve(&self) -> Result<Op3> {
        let op = match self {
            NamedStrategy::Identity => Op3::identity(),
            NamedStrategy::Shuffle1 => shuffle1(),
            NamedStrategy::Shuffle2 => shuffle2(),
            NamedStrategy::FairH => fair_h(),
            NamedStrategy::Conjugate(of) => of.resolve()?.conj(),
            NamedStrategy::ConjugateShuffled(of, which) => which.matrix() * of.resolve()?.conj(),
            NamedStrategy::Params(p) => su3_from_params(p)?,
            NamedStrategy::Matrix(m) => *m,
        };
        if !op.is_special_unitary(UNITARY_TOL) {
            return Err(EngineError::NonUnitaryResolution {
                defect: op.unitarity_defect(),
                det_error: (op.det() - Complex64::new(1.0, 0.0)).norm(),
            });
        }
        Ok(op)
    }

    /// Short human-readable name, e.g. `conjugate(fair-h)`.
    pub fn label(&self) -> String {
        match self {
            NamedStrategy::Identity => "identity".into(),
            NamedStrategy::Shuffle1 => "shuffle1".into(),
            NamedStrategy::Shuffle2 => "shuffle2".into(),
            NamedStrategy::FairH => "fair-h".into(),
            NamedStrategy::Conjugate(of) => format!("conjugate({})", of.label()),
            NamedStrategy::ConjugateShuffled(of, Shuffle::One) => {
                format!("conjugate-shuffle1({})", of.label())
            }
            NamedStrategy::ConjugateShuffled(of, Shuffle::Two) => {
                format!("conjugate-shuffle2({})", of.label())
            }
            NamedStrategy::Params(_) => "params".into(),
            NamedStrategy::Matrix(_) => "matrix".into(),
        }
    }
}

impl fmt::Display for NamedStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Signed permutation matrix in SU(3) with `|j⟩ → ±|perm[j]⟩`.
///
/// Odd permutations get their last column negated so the determinant is 1.
pub fn permutation_strategy(perm: [usize; 3]) -> Result<Op3> {
    let mut seen = [false; 3];
    for &p in &perm {
        if p >= 3 || seen[p] {
            return Err(EngineError::InvalidArgument(format!(
                "{perm:?} is not a permutation of 0..3"
            )));
        }
        seen[p] = true;
    }
    let mut op = Op3::zero();
    for (j, &i) in perm.iter().enumerate() {
        op.0[i][j] = Complex64::new(1.0, 0.0);
    }
    if op.det().re < 0.0 {
        for row in op.0.iter_mut() {
            row[2] = -row[2];
        }
    }
    Ok(op)
}

/// Deterministic classical choice: swaps box 0 with `choice` so a player
/// starting from `|0⟩` lands on `|choice⟩`.
///
/// Only meaningful for basis-ket custom initial states; on the uniform and
/// entangled states any permutation acts like the identity mixture.
pub fn classical_strategy(choice: usize) -> Result<Op3> {
    match choice {
        0 => Ok(Op3::identity()),
        1 => permutation_strategy([1, 0, 2]),
        2 => permutation_strategy([2, 1, 0]),
        _ => Err(EngineError::InvalidArgument(format!(
            "box index {choice} is not 0, 1 or 2"
        ))),
    }
}

/// Bob's winning reply to Alice's `Â` in the entangled game: play `Â*` and
/// stay.
pub fn counter_for_bob(alice: &Op3) -> (Op3, Branch) {
    (alice.conj(), Branch::Stay)
}

/// Alice's winning reply to Bob's `B̂`: `B̂*` against switching, `M̂₁ · B̂*`
/// against staying.
pub fn counter_for_alice(bob: &Op3, branch: Branch) -> Op3 {
    match branch {
        Branch::Switch => bob.conj(),
        Branch::Stay => shuffle1() * bob.conj(),
    }
}

/// Alice's reply to `B̂` that pays both players `1/2` on either branch.
pub fn fair_reply(bob: &Op3) -> Op3 {
    fair_h() * bob.conj()
}

/// A finite classical mixture of pure strategies.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedStrategy {
    components: Vec<(NamedStrategy, f64)>,
}

impl MixedStrategy {
    pub fn new(components: Vec<(NamedStrategy, f64)>) -> Result<Self> {
        if components.is_empty() {
            return Err(EngineError::InvalidMixture("no components".into()));
        }
        let mut total = 0.0;
        for (s, w) in &components {
            if !w.is_finite() || *w < 0.0 {
                return Err(EngineError::InvalidMixture(format!(
                    "weight {w} for {s} is not a non-negative number"
                )));
            }
            total += w;
        }
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(EngineError::InvalidMixture(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(MixedStrategy { components })
    }

    pub fn pure(s: NamedStrategy) -> Self {
        MixedStrategy {
            components: vec![(s, 1.0)],
        }
    }

    pub fn uniform(strategies: Vec<NamedStrategy>) -> Result<Self> {
        let n = strategies.len();
        if n == 0 {
            return Err(EngineError::InvalidMixture("no components".into()));
        }
        Ok(MixedStrategy {
            components: strategies.into_iter().map(|s| (s, 1.0 / n as f64)).collect(),
        })
    }

    /// Uniform over `{Î, M̂₁, M̂₂}`.
    pub fn uniform_shuffles() -> Self {
        MixedStrategy::uniform(vec![
            NamedStrategy::Identity,
            NamedStrategy::Shuffle1,
            NamedStrategy::Shuffle2,
        ])
        .expect("three components")
    }

    pub fn components(&self) -> &[(NamedStrategy, f64)] {
        &self.components
    }

    pub fn resolve(&self) -> Result<ResolvedMixture> {
        let components = self
            .components
            .iter()
            .map(|(s, w)| Ok((s.resolve()?, *w)))
            .collect::<Result<Vec<_>>>()?;
        Ok(ResolvedMixture { components })
    }

    pub fn label(&self) -> String {
        match self.components.as_slice() {
            [(s, _)] => s.label(),
            many => {
                let parts: Vec<String> =
                    many.iter().map(|(s, w)| format!("{w:.4}·{s}")).collect();
                format!("mix[{}]", parts.join(", "))
            }
        }
    }
}

impl From<NamedStrategy> for MixedStrategy {
    fn from(s: NamedStrategy) -> Self {
        MixedStrategy::pure(s)
    }
}

/// Mixture with every component already resolved to its matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ResolvedMixture {
    pub components: Vec<(Op3, f64)>,
}

impl ResolvedMixture {
    pub fn pure(op: Op3) -> Self {
        ResolvedMixture {
            components: vec![(op, 1.0)],
        }
    }
}

/// Payoff of two independent classical mixtures: the weighted average of
/// the pure-pair payoffs.
pub fn mixed_payoff(
    regime: &InitialStateRegime,
    alice: &MixedStrategy,
    bob: &MixedStrategy,
    gamma: f64,
    mode: PayoffMode,
) -> Result<PayoffResult> {
    let game = Game::new(regime.clone(), mode)?;
    mixed_payoff_resolved(&game, &alice.resolve()?, &bob.resolve()?, gamma)
}

pub fn mixed_payoff_resolved(
    game: &Game,
    alice: &ResolvedMixture,
    bob: &ResolvedMixture,
    gamma: f64,
) -> Result<PayoffResult> {
    let mut bob_total = 0.0;
    let mut norm_total = 0.0;
    for (a, wa) in &alice.components {
        for (b, wb) in &bob.components {
            let r = game.expected_payoff(a, b, gamma)?;
            bob_total += wa * wb * r.bob;
            norm_total += wa * wb * r.final_norm2;
        }
    }
    Ok(PayoffResult::from_bob(bob_total, norm_total))
}
