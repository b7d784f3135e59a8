//! The game's fixed operators, initial states and payoff measurement.
//!
//! A round runs the pipeline
//!
//! ```text
//! |ψ_f⟩ = (Ŝ cos γ + N̂ sin γ) Ô (Î ⊗ B̂ ⊗ Â) |ψ_i⟩
//! ```
//!
//! where `Ô` marks an opened box, `Ŝ` moves Bob to the remaining closed box
//! and `N̂` is the identity. Bob wins on every ket `|i j j⟩`.
//!
//! `Ŝ cos γ + N̂ sin γ` is not unitary, and evaluating the payoff on it
//! literally adds `cos γ sin γ` interference terms. [`PayoffMode::Incoherent`]
//! (the default) instead mixes the two pure branches with weights
//! `cos²γ` and `sin²γ`; [`PayoffMode::CoherentNormalized`] applies the sum and
//! renormalizes. Both agree at `γ ∈ {0, π/2}`.

use std::f64::consts::FRAC_PI_2;
use std::sync::LazyLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{EngineError, Result};
use crate::linalg::{
    basis_index, decode_index, embed_alice, embed_bob, Op27, Op3, StateVector27, DIM,
    INTERNAL_TOL, UNITARY_TOL,
};

/// Slack allowed when matching `γ` against the ends of `[0, π/2]`.
pub const GAMMA_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialStateRegime {
    /// `|0⟩ ⊗ uniform ⊗ uniform`.
    Unentangled,
    /// `|0⟩ ⊗ (|00⟩ + |11⟩ + |22⟩)/√3`.
    Entangled,
    /// Caller-supplied state; must be normalized with support on `o = 0` only.
    Custom(Box<StateVector27>),
}

impl InitialStateRegime {
    pub fn label(&self) -> &'static str {
        match self {
            InitialStateRegime::Unentangled => "unentangled",
            InitialStateRegime::Entangled => "entangled",
            InitialStateRegime::Custom(_) => "custom",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PayoffMode {
    #[default]
    #[serde(rename = "incoherent")]
    Incoherent,
    #[serde(rename = "coherent")]
    CoherentNormalized,
}

impl PayoffMode {
    pub fn label(&self) -> &'static str {
        match self {
            PayoffMode::Incoherent => "incoherent",
            PayoffMode::CoherentNormalized => "coherent",
        }
    }
}

/// Bob's switch decision at one of the two pure branches.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// `γ = 0`.
    Switch,
    /// `γ = π/2`.
    Stay,
}

impl Branch {
    pub fn gamma(self) -> f64 {
        match self {
            Branch::Switch => 0.0,
            Branch::Stay => FRAC_PI_2,
        }
    }

    /// The pure branch `γ` sits on, if any.
    pub fn from_gamma(gamma: f64) -> Option<Branch> {
        if gamma.abs() <= GAMMA_SLACK {
            Some(Branch::Switch)
        } else if (gamma - FRAC_PI_2).abs() <= GAMMA_SLACK {
            Some(Branch::Stay)
        } else {
            None
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PayoffResult {
    pub bob: f64,
    pub alice: f64,
    /// Norm² of the final state before any renormalization.
    pub final_norm2: f64,
}

impl PayoffResult {
    pub(crate) fn from_bob(bob: f64, final_norm2: f64) -> Self {
        let bob = bob.clamp(0.0, 1.0);
        PayoffResult {
            bob,
            alice: 1.0 - bob,
            final_norm2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FinalState {
    /// Unit-norm final state.
    pub state: StateVector27,
    pub norm2_before: f64,
}

fn open_image(index: usize) -> usize {
    let (l, j, k) = decode_index(index);
    if j != k {
        let i = 3 - j - k;
        basis_index((i + l) % 3, j, k)
    } else {
        basis_index((j + l + 1) % 3, j, j)
    }
}

fn switch_image(index: usize) -> usize {
    let (i, j, k) = decode_index(index);
    if j != i {
        basis_index(i, 3 - i - j, k)
    } else {
        index
    }
}

/// The open-box operator `Ô`.
///
/// For `j ≠ k`, `|ℓ j k⟩ → |(i + ℓ) mod 3, j, k⟩` with `i` the third box;
/// for `|ℓ j j⟩` Alice may open either losing box and the choice is fixed as
/// `|(j + ℓ + 1) mod 3, j, j⟩`.
pub fn build_open_operator() -> Op27 {
    Op27::from_permutation(open_image)
}

/// Bob's switch operator `Ŝ`: `|i j k⟩ → |i ℓ k⟩` for `j ≠ i`, with `ℓ`
/// the box that is neither opened nor chosen. Kets with `j = i` are fixed.
pub fn build_switch_operator() -> Op27 {
    Op27::from_permutation(switch_image)
}

static OPEN_PERM: LazyLock<[usize; DIM]> = LazyLock::new(|| std::array::from_fn(open_image));
static SWITCH_PERM: LazyLock<[usize; DIM]> = LazyLock::new(|| std::array::from_fn(switch_image));

fn permute(perm: &[usize; DIM], s: &StateVector27) -> StateVector27 {
    let mut out = StateVector27::zero();
    for (j, &i) in perm.iter().enumerate() {
        out.0[i] = s.0[j];
    }
    out
}

/// Bob's winning probability mass `Σ_ij |⟨i j j|ψ⟩|²` (unnormalized).
pub fn winning_mass(s: &StateVector27) -> f64 {
    let mut total = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            total += s.0[basis_index(i, j, j)].norm_sqr();
        }
    }
    total
}

pub fn initial_state(regime: &InitialStateRegime) -> Result<StateVector27> {
    match regime {
        InitialStateRegime::Unentangled => {
            let mut s = StateVector27::zero();
            for b in 0..3 {
                for a in 0..3 {
                    s.0[basis_index(0, b, a)] = Complex64::new(1.0 / 3.0, 0.0);
                }
            }
            Ok(s)
        }
        InitialStateRegime::Entangled => {
            let mut s = StateVector27::zero();
            let amp = Complex64::new(1.0 / 3f64.sqrt(), 0.0);
            for j in 0..3 {
                s.0[basis_index(0, j, j)] = amp;
            }
            Ok(s)
        }
        InitialStateRegime::Custom(s) => {
            validate_custom(s)?;
            Ok(**s)
        }
    }
}

fn validate_custom(s: &StateVector27) -> Result<()> {
    if !s.is_finite() {
        return Err(EngineError::BadCustomState("non-finite amplitude".into()));
    }
    let n = s.norm2();
    if (n - 1.0).abs() > UNITARY_TOL {
        return Err(EngineError::BadCustomState(format!(
            "norm² = {n}, expected 1"
        )));
    }
    for (i, z) in s.0.iter().enumerate() {
        let (o, b, a) = decode_index(i);
        if o != 0 && z.norm() > INTERNAL_TOL {
            return Err(EngineError::BadCustomState(format!(
                "amplitude on |{o}{b}{a}⟩; the opened-box qutrit must start in |0⟩"
            )));
        }
    }
    Ok(())
}

fn check_gamma(gamma: f64) -> Result<f64> {
    if !gamma.is_finite() || !(-GAMMA_SLACK..=FRAC_PI_2 + GAMMA_SLACK).contains(&gamma) {
        return Err(EngineError::GammaOutOfRange(gamma));
    }
    Ok(gamma.clamp(0.0, FRAC_PI_2))
}

/// A validated game setup: the initial state is built once and reused for
/// every strategy pair.
#[derive(Clone, Debug)]
pub struct Game {
    regime: InitialStateRegime,
    initial: StateVector27,
    mode: PayoffMode,
}

/// The two pure-branch final states of a round.
#[derive(Clone, Copy, Debug)]
pub struct Branches {
    /// `Ô (Î⊗B̂⊗Â)|ψ_i⟩`, which is also the stay branch.
    pub stay: StateVector27,
    /// `Ŝ Ô (Î⊗B̂⊗Â)|ψ_i⟩`.
    pub switch: StateVector27,
}

impl Branches {
    pub fn winning(&self) -> (f64, f64) {
        (winning_mass(&self.switch), winning_mass(&self.stay))
    }
}

impl Game {
    pub fn new(regime: InitialStateRegime, mode: PayoffMode) -> Result<Self> {
        let initial = initial_state(&regime)?;
        Ok(Game {
            regime,
            initial,
            mode,
        })
    }

    pub fn regime(&self) -> &InitialStateRegime {
        &self.regime
    }

    pub fn mode(&self) -> PayoffMode {
        self.mode
    }

    pub fn initial(&self) -> &StateVector27 {
        &self.initial
    }

    pub fn with_mode(&self, mode: PayoffMode) -> Game {
        Game {
            mode,
            ..self.clone()
        }
    }

    /// Both pure branches, without validating the strategies.
    pub fn branches(&self, alice: &Op3, bob: &Op3) -> Branches {
        let played = self.initial.apply_bob(bob).apply_alice(alice);
        let stay = permute(&OPEN_PERM, &played);
        let switch = permute(&SWITCH_PERM, &stay);
        Branches { stay, switch }
    }

    /// Bob's payoff without validating inputs. `gamma` must already lie in
    /// `[0, π/2]`.
    pub(crate) fn bob_payoff_unchecked(&self, alice: &Op3, bob: &Op3, gamma: f64) -> (f64, f64) {
        let br = self.branches(alice, bob);
        let (c, s) = (gamma.cos(), gamma.sin());
        match self.mode {
            PayoffMode::Incoherent => {
                let (sw, st) = br.winning();
                let norm = c * c * br.switch.norm2() + s * s * br.stay.norm2();
                (c * c * sw + s * s * st, norm)
            }
            PayoffMode::CoherentNormalized => {
                let f = combine(&br, c, s);
                let n = f.norm2();
                if n > 0.0 {
                    (winning_mass(&f) / n, n)
                } else {
                    (f64::NAN, 0.0)
                }
            }
        }
    }

    pub fn final_state(&self, alice: &Op3, bob: &Op3, gamma: f64) -> Result<FinalState> {
        alice.check_special_unitary(UNITARY_TOL)?;
        bob.check_special_unitary(UNITARY_TOL)?;
        let gamma = check_gamma(gamma)?;
        let br = self.branches(alice, bob);
        let raw = match (self.mode, Branch::from_gamma(gamma)) {
            (_, Some(Branch::Switch)) => br.switch,
            (_, Some(Branch::Stay)) => br.stay,
            (PayoffMode::Incoherent, None) => return Err(EngineError::IncoherentBranchOnly(gamma)),
            (PayoffMode::CoherentNormalized, None) => combine(&br, gamma.cos(), gamma.sin()),
        };
        let norm2_before = raw.norm2();
        let state = raw
            .normalized()
            .ok_or_else(|| EngineError::InvalidArgument("final state vanishes".into()))?;
        Ok(FinalState {
            state,
            norm2_before,
        })
    }

    pub fn expected_payoff(&self, alice: &Op3, bob: &Op3, gamma: f64) -> Result<PayoffResult> {
        alice.check_special_unitary(UNITARY_TOL)?;
        bob.check_special_unitary(UNITARY_TOL)?;
        let gamma = check_gamma(gamma)?;
        let (bob_payoff, norm2) = self.bob_payoff_unchecked(alice, bob, gamma);
        if !bob_payoff.is_finite() {
            return Err(EngineError::InvalidArgument("final state vanishes".into()));
        }
        Ok(PayoffResult::from_bob(bob_payoff, norm2))
    }
}

fn combine(br: &Branches, c: f64, s: f64) -> StateVector27 {
    br.switch.scale(Complex64::new(c, 0.0)) + br.stay.scale(Complex64::new(s, 0.0))
}

pub fn final_state(
    regime: &InitialStateRegime,
    alice: &Op3,
    bob: &Op3,
    gamma: f64,
    mode: PayoffMode,
) -> Result<FinalState> {
    Game::new(regime.clone(), mode)?.final_state(alice, bob, gamma)
}

pub fn expected_payoff(
    regime: &InitialStateRegime,
    alice: &Op3,
    bob: &Op3,
    gamma: f64,
    mode: PayoffMode,
) -> Result<PayoffResult> {
    Game::new(regime.clone(), mode)?.expected_payoff(alice, bob, gamma)
}

/// Reference pipeline built from explicit 27×27 operators. Slower than
/// [`Game::branches`]; kept public so callers can inspect the operator form.
pub fn final_state_via_operators(
    initial: &StateVector27,
    alice: &Op3,
    bob: &Op3,
    gamma: f64,
) -> StateVector27 {
    let open = build_open_operator();
    let switch = build_switch_operator();
    let played = embed_bob(bob).compose(&embed_alice(alice));
    let combo = switch
        .scale(Complex64::new(gamma.cos(), 0.0))
        .add(&Op27::identity().scale(Complex64::new(gamma.sin(), 0.0)));
    combo.compose(&open).compose(&played).apply(initial)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_su3;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_4;

    fn ket(o: usize, b: usize, a: usize) -> usize {
        basis_index(o, b, a)
    }

    #[test]
    fn open_operator_examples() {
        let p = build_open_operator().as_permutation().expect("Ô is a permutation");
        assert_eq!(p[ket(0, 0, 0)], ket(1, 0, 0));
        assert_eq!(p[ket(0, 1, 2)], ket(0, 1, 2));
        assert_eq!(p[ket(2, 1, 1)], ket(1, 1, 1));
    }

    #[test]
    fn open_operator_marks_a_losing_box() {
        // from o = 0 the marked box is never Alice's or Bob's
        let p = build_open_operator().as_permutation().unwrap();
        for b in 0..3 {
            for a in 0..3 {
                let (o, b2, a2) = decode_index(p[ket(0, b, a)]);
                assert_eq!((b2, a2), (b, a));
                assert!(o != b && o != a);
            }
        }
    }

    #[test]
    fn switch_operator_examples() {
        let sw = build_switch_operator();
        let p = sw.as_permutation().expect("Ŝ is a permutation");
        assert_eq!(p[ket(2, 0, 1)], ket(2, 1, 1));
        assert_eq!(p[ket(2, 2, 0)], ket(2, 2, 0));
        for j in 0..DIM {
            assert_eq!(p[p[j]], j);
        }
        assert_eq!(sw.compose(&sw), Op27::identity());
    }

    #[test]
    fn operators_are_unitary() {
        assert!(build_open_operator().unitarity_defect() <= 1e-12);
        assert!(build_switch_operator().unitarity_defect() <= 1e-12);
        let open = build_open_operator();
        assert_ne!(open.compose(&open), Op27::identity());
    }

    #[test]
    fn initial_states() {
        let u = initial_state(&InitialStateRegime::Unentangled).unwrap();
        for b in 0..3 {
            for a in 0..3 {
                assert!((u[ket(0, b, a)] - Complex64::new(1.0 / 3.0, 0.0)).norm() < 1e-15);
            }
        }
        assert!((u.norm2() - 1.0).abs() < 1e-12);

        let e = initial_state(&InitialStateRegime::Entangled).unwrap();
        let amp = 1.0 / 3f64.sqrt();
        for j in 0..3 {
            assert!((e[ket(0, j, j)].re - amp).abs() < 1e-15);
        }
        assert!((e.norm2() - 1.0).abs() < 1e-12);

        let k = StateVector27::basis(0, 1, 2);
        assert_eq!(initial_state(&InitialStateRegime::Custom(Box::new(k))).unwrap(), k);
    }

    #[test]
    fn custom_state_validation() {
        let bad_support = StateVector27::basis(1, 0, 0);
        assert!(matches!(
            initial_state(&InitialStateRegime::Custom(Box::new(bad_support))),
            Err(EngineError::BadCustomState(_))
        ));
        let unnormalized = StateVector27::basis(0, 0, 0).scale(Complex64::new(2.0, 0.0));
        assert_eq!(
            initial_state(&InitialStateRegime::Custom(Box::new(unnormalized))).unwrap_err().code(),
            "BadCustomState"
        );
    }

    #[test]
    fn pure_switch_branch_matches_in_both_modes() {
        let a = random_su3(5).unwrap();
        let b = random_su3(6).unwrap();
        for regime in [InitialStateRegime::Unentangled, InitialStateRegime::Entangled] {
            let inc = final_state(&regime, &a, &b, 0.0, PayoffMode::Incoherent).unwrap();
            let coh = final_state(&regime, &a, &b, 0.0, PayoffMode::CoherentNormalized).unwrap();
            assert_eq!(inc.state, coh.state);
            let init = initial_state(&regime).unwrap();
            let reference = final_state_via_operators(&init, &a, &b, 0.0);
            assert!(inc.state.max_abs_diff(&reference) < 1e-14);
        }
    }

    #[test]
    fn classical_switch_wins_on_distinct_choices() {
        let i = Op3::identity();
        let f = final_state(&InitialStateRegime::Unentangled, &i, &i, 0.0, PayoffMode::Incoherent)
            .unwrap();
        for idx in 0..DIM {
            let (o, b, a) = decode_index(idx);
            let amp = f.state[idx].norm();
            if b == a && o != b {
                assert!((amp - 1.0 / 3.0).abs() < 1e-15, "|{o}{b}{a}⟩ = {amp}");
            } else if b == a {
                assert_eq!(amp, 0.0);
            }
        }
        assert!((winning_mass(&f.state) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn entangled_stay_keeps_correlation() {
        let i = Op3::identity();
        let f = final_state(&InitialStateRegime::Entangled, &i, &i, FRAC_PI_2, PayoffMode::Incoherent)
            .unwrap();
        let amp = 1.0 / 3f64.sqrt();
        for j in 0..3 {
            assert!((f.state[ket((j + 1) % 3, j, j)].re - amp).abs() < 1e-15);
        }
        assert!((f.state.norm2() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn incoherent_final_state_needs_pure_branch() {
        let i = Op3::identity();
        let err = final_state(&InitialStateRegime::Unentangled, &i, &i, 0.3, PayoffMode::Incoherent)
            .unwrap_err();
        assert_eq!(err, EngineError::IncoherentBranchOnly(0.3));
    }

    #[test]
    fn payoff_examples() {
        let i = Op3::identity();
        let u = InitialStateRegime::Unentangled;
        let e = InitialStateRegime::Entangled;
        let inc = PayoffMode::Incoherent;
        let coh = PayoffMode::CoherentNormalized;
        assert!((expected_payoff(&u, &i, &i, 0.0, inc).unwrap().bob - 2.0 / 3.0).abs() < 1e-15);
        assert!((expected_payoff(&u, &i, &i, FRAC_PI_2, inc).unwrap().bob - 1.0 / 3.0).abs() < 1e-15);
        assert!((expected_payoff(&u, &i, &i, FRAC_PI_4, coh).unwrap().bob - 0.5).abs() < 1e-12);
        for mode in [inc, coh] {
            assert!((expected_payoff(&e, &i, &i, FRAC_PI_2, mode).unwrap().bob - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn coherent_mode_interferes_off_the_endpoints() {
        // hand expansion for A = B = I, unentangled:
        // coherent = (1 + 2cs + c²)/(3 + 4cs), incoherent = (1 + c²)/3
        let i = Op3::identity();
        let u = InitialStateRegime::Unentangled;
        for k in 0..=20 {
            let g = FRAC_PI_2 * k as f64 / 20.0;
            let (c, s) = (g.cos(), g.sin());
            let coh = expected_payoff(&u, &i, &i, g, PayoffMode::CoherentNormalized).unwrap();
            assert!((coh.bob - (1.0 + 2.0 * c * s + c * c) / (3.0 + 4.0 * c * s)).abs() < 1e-12);
            assert!((coh.final_norm2 - (3.0 + 4.0 * c * s) / 3.0).abs() < 1e-12);
            let inc = expected_payoff(&u, &i, &i, g, PayoffMode::Incoherent).unwrap();
            assert!((inc.bob - (1.0 + c * c) / 3.0).abs() < 1e-12);
        }
        let g = std::f64::consts::FRAC_PI_6;
        let coh = expected_payoff(&u, &i, &i, g, PayoffMode::CoherentNormalized).unwrap();
        assert!((coh.bob - 0.5528312163512968).abs() < 1e-12);
    }

    #[test]
    fn coherent_matches_dense_operator_pipeline() {
        let a = random_su3(17).unwrap();
        let b = random_su3(18).unwrap();
        let game = Game::new(InitialStateRegime::Entangled, PayoffMode::CoherentNormalized).unwrap();
        let g = 0.4;
        let f = game.final_state(&a, &b, g).unwrap();
        let raw = final_state_via_operators(game.initial(), &a, &b, g);
        assert!((raw.norm2() - f.norm2_before).abs() < 1e-12);
        assert!(raw.normalized().unwrap().max_abs_diff(&f.state) < 1e-12);
    }

    #[test]
    fn gamma_and_unitarity_are_validated() {
        let i = Op3::identity();
        let u = InitialStateRegime::Unentangled;
        assert_eq!(
            expected_payoff(&u, &i, &i, 2.0, PayoffMode::Incoherent).unwrap_err().code(),
            "GammaOutOfRange"
        );
        assert_eq!(
            expected_payoff(&u, &i, &i, -0.1, PayoffMode::Incoherent).unwrap_err().code(),
            "GammaOutOfRange"
        );
        let bad = Op3::from_real([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 2.0]]);
        assert_eq!(
            expected_payoff(&u, &bad, &i, 0.0, PayoffMode::Incoherent).unwrap_err().code(),
            "NonUnitaryStrategy"
        );
        // unitary but det = -1
        let odd = Op3::from_real([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]);
        assert!(expected_payoff(&u, &i, &odd, 0.0, PayoffMode::Incoherent).is_err());
    }

    #[test]
    fn unitary_column_sums_total_three() {
        for seed in 0..200 {
            let b = random_su3(seed).unwrap();
            let total: f64 = (0..3)
                .map(|j| (b.0[0][j] + b.0[1][j] + b.0[2][j]).norm_sqr())
                .sum();
            assert!((total - 3.0).abs() < 1e-9);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn incoherent_payoff_is_affine_in_cos2(sa in any::<u64>(), sb in any::<u64>(), g in 0.0..FRAC_PI_2, entangled in any::<bool>()) {
            let regime = if entangled { InitialStateRegime::Entangled } else { InitialStateRegime::Unentangled };
            let a = random_su3(sa).unwrap();
            let b = random_su3(sb).unwrap();
            let inc = PayoffMode::Incoherent;
            let p0 = expected_payoff(&regime, &a, &b, 0.0, inc).unwrap().bob;
            let p1 = expected_payoff(&regime, &a, &b, FRAC_PI_2, inc).unwrap().bob;
            let pg = expected_payoff(&regime, &a, &b, g, inc).unwrap();
            let c2 = g.cos().powi(2);
            prop_assert!((pg.bob - (c2 * p0 + (1.0 - c2) * p1)).abs() < 1e-12);
            prop_assert!((pg.bob + pg.alice - 1.0).abs() < 1e-12);
        }

        #[test]
        fn endpoint_modes_agree_and_preserve_norm(sa in any::<u64>(), sb in any::<u64>(), stay in any::<bool>(), entangled in any::<bool>()) {
            let regime = if entangled { InitialStateRegime::Entangled } else { InitialStateRegime::Unentangled };
            let a = random_su3(sa).unwrap();
            let b = random_su3(sb).unwrap();
            let g = if stay { FRAC_PI_2 } else { 0.0 };
            let inc = expected_payoff(&regime, &a, &b, g, PayoffMode::Incoherent).unwrap();
            let coh = expected_payoff(&regime, &a, &b, g, PayoffMode::CoherentNormalized).unwrap();
            prop_assert!((inc.bob - coh.bob).abs() < 1e-12);
            prop_assert!((coh.final_norm2 - 1.0).abs() < 1e-12);
            let f = final_state(&regime, &a, &b, g, PayoffMode::Incoherent).unwrap();
            prop_assert!((f.norm2_before - 1.0).abs() < 1e-12);
        }
    }
}
