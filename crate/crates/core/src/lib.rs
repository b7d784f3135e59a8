//! Exact three-qutrit engine for the quantum Monty Hall game.
//!
//! Alice (the banker) hides a prize, Bob (the player) picks a box, a losing
//! box is marked as opened and Bob may switch. Each choice is a qutrit and
//! each player's strategy is an SU(3) operator on their own qutrit. The
//! crate computes exact payoffs for any strategy pair, checks them against
//! closed-form expressions, searches for best responses and equilibria, and
//! samples measured outcomes for iterated play.
//!
//! The layers, bottom up:
//!
//! * [`linalg`] – 3×3 operators, the 27-amplitude joint state, SU(3) charts.
//! * [`game`] – open/switch operators, initial states, payoff measurement.
//! * [`strategy`] – named strategies, counterstrategies, mixtures.
//! * [`closed_form`] – independent payoff formulas used as an oracle.
//! * [`equilibrium`] – best-response search and Nash checks.
//! * [`play`] – sampled rounds and reproducible matches.
//! * [`reproduction`] – the full claim-by-claim verification suite.

// 3×3 kernels read more clearly with explicit indices
#![allow(clippy::needless_range_loop)]

pub mod closed_form;
pub mod equilibrium;
pub mod error;
pub mod game;
pub mod linalg;
pub mod play;
pub mod reproduction;
pub mod strategy;

pub use error::{EngineError, Result};
pub use game::{expected_payoff, final_state, Branch, Game, InitialStateRegime, PayoffMode, PayoffResult};
pub use linalg::{Op3, StateVector27, Su3Params};
pub use strategy::{MixedStrategy, NamedStrategy, Shuffle};
