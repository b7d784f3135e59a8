//! Closed-form payoff expressions, used as an independent check on the
//! state-vector engine.
//!
//! Nothing here touches the game operators. The formulas are written in
//! matrix-element notation where `a_jk` is the amplitude Alice's operator
//! sends from her starting ket `|j⟩` to `|k⟩`, i.e. `a_jk = ⟨k|Â|j⟩`, which
//! is `op[k][j]` in [`Op3`] storage.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{EngineError, Result};
use crate::game::{expected_payoff, InitialStateRegime, PayoffMode};
use crate::linalg::{Op3, UNITARY_TOL};

/// Agreement threshold for [`oracle_match`].
pub const ORACLE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClosedFormRegime {
    Unentangled,
    Entangled,
}

impl From<ClosedFormRegime> for InitialStateRegime {
    fn from(r: ClosedFormRegime) -> Self {
        match r {
            ClosedFormRegime::Unentangled => InitialStateRegime::Unentangled,
            ClosedFormRegime::Entangled => InitialStateRegime::Entangled,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosedFormInput {
    pub alice: Op3,
    pub bob: Op3,
    pub gamma: f64,
    pub regime: ClosedFormRegime,
}

impl ClosedFormInput {
    pub fn new(alice: Op3, bob: Op3, gamma: f64, regime: ClosedFormRegime) -> Result<Self> {
        for m in [&alice, &bob] {
            if !m.is_unitary(UNITARY_TOL) {
                return Err(EngineError::NonUnitaryStrategy {
                    defect: m.unitarity_defect(),
                    det_error: (m.det() - Complex64::new(1.0, 0.0)).norm(),
                });
            }
        }
        if !(0.0..=FRAC_PI_2).contains(&gamma) {
            return Err(EngineError::GammaOutOfRange(gamma));
        }
        Ok(ClosedFormInput {
            alice,
            bob,
            gamma,
            regime,
        })
    }
}

/// `x_jk` in matrix-element notation.
#[inline]
fn elem(op: &Op3, j: usize, k: usize) -> Complex64 {
    op.0[k][j]
}

/// `|x_0j + x_1j + x_2j|²`.
fn column_weight(op: &Op3, j: usize) -> f64 {
    (elem(op, 0, j) + elem(op, 1, j) + elem(op, 2, j)).norm_sqr()
}

/// Bob's payoff from the uniform product start:
///
/// ```text
/// (1/9) cos²γ Σ_{j≠k} |Σ_i b_ij|² |Σ_i a_ik|²  +  (1/9) sin²γ Σ_j |Σ_i b_ij|² |Σ_i a_ij|²
/// ```
pub fn payoff_unentangled_closed(input: &ClosedFormInput) -> f64 {
    let (c2, s2) = (input.gamma.cos().powi(2), input.gamma.sin().powi(2));
    let wb: Vec<f64> = (0..3).map(|j| column_weight(&input.bob, j)).collect();
    let wa: Vec<f64> = (0..3).map(|k| column_weight(&input.alice, k)).collect();
    let mut off = 0.0;
    let mut diag = 0.0;
    for j in 0..3 {
        for k in 0..3 {
            if j == k {
                diag += wb[j] * wa[k];
            } else {
                off += wb[j] * wa[k];
            }
        }
    }
    (c2 * off + s2 * diag) / 9.0
}

/// Bob's payoff from the maximally entangled start:
///
/// ```text
/// (1/3) sin²γ Σ_j |Σ_ℓ b_ℓj a_ℓj|²  +  (1/3) cos²γ Σ_{j≠k} |Σ_ℓ b_ℓj a_ℓk|²
/// ```
pub fn payoff_entangled_closed(input: &ClosedFormInput) -> f64 {
    let (c2, s2) = (input.gamma.cos().powi(2), input.gamma.sin().powi(2));
    let corr = |j: usize, k: usize| -> f64 {
        (0..3)
            .map(|l| elem(&input.bob, l, j) * elem(&input.alice, l, k))
            .sum::<Complex64>()
            .norm_sqr()
    };
    let mut diag = 0.0;
    let mut off = 0.0;
    for j in 0..3 {
        for k in 0..3 {
            if j == k {
                diag += corr(j, k);
            } else {
                off += corr(j, k);
            }
        }
    }
    (s2 * diag + c2 * off) / 3.0
}

pub fn payoff_closed(input: &ClosedFormInput) -> f64 {
    match input.regime {
        ClosedFormRegime::Unentangled => payoff_unentangled_closed(input),
        ClosedFormRegime::Entangled => payoff_entangled_closed(input),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub closed_form: f64,
    pub engine: f64,
    pub difference: f64,
    pub mode: PayoffMode,
    pub pass: bool,
}

/// Compares the closed form against the engine in `mode`. Only
/// [`PayoffMode::Incoherent`] is expected to agree off the branch endpoints.
pub fn oracle_match(input: &ClosedFormInput, mode: PayoffMode) -> Result<OracleReport> {
    let closed_form = payoff_closed(input);
    let engine = expected_payoff(
        &input.regime.into(),
        &input.alice,
        &input.bob,
        input.gamma,
        mode,
    )?
    .bob;
    let difference = (closed_form - engine).abs();
    Ok(OracleReport {
        closed_form,
        engine,
        difference,
        mode,
        pass: difference <= ORACLE_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_su3;
    use crate::strategy::{fair_h, shuffle1};
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_6};

    fn input(a: Op3, b: Op3, g: f64, r: ClosedFormRegime) -> ClosedFormInput {
        ClosedFormInput::new(a, b, g, r).unwrap()
    }

    #[test]
    fn classical_formula() {
        let i = Op3::identity();
        for k in 0..=10 {
            let g = FRAC_PI_2 * k as f64 / 10.0;
            let want = 2.0 / 3.0 * g.cos().powi(2) + 1.0 / 3.0 * g.sin().powi(2);
            let v = payoff_unentangled_closed(&input(i, i, g, ClosedFormRegime::Unentangled));
            assert!((v - want).abs() < 1e-15);
            let a = random_su3(k).unwrap();
            let v = payoff_unentangled_closed(&input(a, i, g, ClosedFormRegime::Unentangled));
            assert!((v - want).abs() < 1e-12);
        }
        let v = payoff_unentangled_closed(&input(i, shuffle1(), 0.0, ClosedFormRegime::Unentangled));
        assert!((v - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn identity_bob_sees_alice_only_through_unit_sums() {
        for seed in 0..50 {
            let a = random_su3(seed).unwrap();
            let total: f64 = (0..3).map(|j| column_weight(&a, j)).sum();
            assert!((total - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn entangled_formula_examples() {
        let i = Op3::identity();
        for g in [0.0, 0.3, FRAC_PI_4, 1.2, FRAC_PI_2] {
            let v = payoff_entangled_closed(&input(fair_h(), i, g, ClosedFormRegime::Entangled));
            assert!((v - 0.5).abs() < 1e-12);
        }
        let v = payoff_entangled_closed(&input(i, i, FRAC_PI_2, ClosedFormRegime::Entangled));
        assert!((v - 1.0).abs() < 1e-15);
        for seed in 0..20 {
            let a = random_su3(seed).unwrap();
            let v = payoff_entangled_closed(&input(a, a.conj(), FRAC_PI_2, ClosedFormRegime::Entangled));
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_forms_stay_in_unit_interval() {
        for seed in 0..200 {
            let a = random_su3(seed).unwrap();
            let b = random_su3(seed + 10_000).unwrap();
            let g = (seed as f64 * 0.37) % FRAC_PI_2;
            for r in [ClosedFormRegime::Unentangled, ClosedFormRegime::Entangled] {
                let v = payoff_closed(&input(a, b, g, r));
                assert!((-1e-12..=1.0 + 1e-12).contains(&v));
            }
        }
    }

    #[test]
    fn engine_and_closed_form_agree() {
        for seed in 0..500u64 {
            let a = random_su3(2 * seed).unwrap();
            let b = random_su3(2 * seed + 1).unwrap();
            let g = FRAC_PI_2 * ((seed as f64 * 0.618_034) % 1.0);
            for r in [ClosedFormRegime::Unentangled, ClosedFormRegime::Entangled] {
                let rep = oracle_match(&input(a, b, g, r), PayoffMode::Incoherent).unwrap();
                assert!(rep.pass, "seed {seed} {r:?}: {rep:?}");
            }
        }
    }

    #[test]
    fn coherent_mode_departs_from_closed_form() {
        let i = Op3::identity();
        // equal weights: interference and renormalization cancel
        let rep = oracle_match(
            &input(i, i, FRAC_PI_4, ClosedFormRegime::Unentangled),
            PayoffMode::CoherentNormalized,
        )
        .unwrap();
        assert!(rep.pass);
        let rep = oracle_match(
            &input(i, i, FRAC_PI_6, ClosedFormRegime::Unentangled),
            PayoffMode::CoherentNormalized,
        )
        .unwrap();
        assert!(!rep.pass);
        assert!((rep.closed_form - 7.0 / 12.0).abs() < 1e-12);
        assert!((rep.engine - 0.5528312163512968).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_unitary_input() {
        let bad = Op3::from_real([[2.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        assert!(ClosedFormInput::new(bad, Op3::identity(), 0.0, ClosedFormRegime::Entangled).is_err());
    }
}
