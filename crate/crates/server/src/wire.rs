//! JSON wire formats shared by the command line and the HTTP API.
//!
//! Complex numbers travel as `[re, im]` pairs and `γ` as a raw float in
//! radians. The layouts are described by the schema files under `schema/v1`.

use qmh::equilibrium::BestResponseResult;
use qmh::linalg::UNITARY_TOL;
use qmh::play::AlicePolicy;
use qmh::{
    EngineError, InitialStateRegime, MixedStrategy, NamedStrategy, Op3, PayoffMode, PayoffResult,
    Shuffle, Su3Params,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::ApiError;

/// Version of the wire formats and schema files.
pub const WIRE_VERSION: &str = "1";

/// A pure strategy on the wire.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StrategySpecWire {
    Preset {
        preset: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        of: Option<Box<StrategySpecWire>>,
    },
    Params {
        params: [f64; 8],
    },
    Matrix {
        matrix: [[[f64; 2]; 3]; 3],
    },
}

/// Presets that stand alone.
pub const BASE_PRESETS: [&str; 4] = ["identity", "shuffle1", "shuffle2", "fair-h"];
/// Presets that wrap another spec given under `of`.
pub const WRAPPING_PRESETS: [&str; 3] = ["conjugate", "conjugate-shuffle1", "conjugate-shuffle2"];

impl StrategySpecWire {
    pub fn preset(name: &str) -> Self {
        StrategySpecWire::Preset {
            preset: name.into(),
            of: None,
        }
    }

    pub fn to_strategy(&self) -> Result<NamedStrategy, ApiError> {
        match self {
            StrategySpecWire::Preset { preset, of } => {
                let inner = || -> Result<NamedStrategy, ApiError> {
                    match of {
                        Some(spec) => spec.to_strategy(),
                        None => Err(ApiError::bad_request(
                            "MissingField",
                            format!("preset {preset:?} needs an \"of\" spec"),
                        )),
                    }
                };
                let base = |s: NamedStrategy| -> Result<NamedStrategy, ApiError> {
                    if of.is_some() {
                        return Err(ApiError::bad_request(
                            "UnexpectedField",
                            format!("preset {preset:?} does not take an \"of\" spec"),
                        ));
                    }
                    Ok(s)
                };
                match preset.as_str() {
                    "identity" => base(NamedStrategy::Identity),
                    "shuffle1" => base(NamedStrategy::Shuffle1),
                    "shuffle2" => base(NamedStrategy::Shuffle2),
                    "fair-h" => base(NamedStrategy::FairH),
                    "conjugate" => Ok(NamedStrategy::conjugate(inner()?)),
                    "conjugate-shuffle1" => Ok(NamedStrategy::conjugate_shuffled(inner()?, Shuffle::One)),
                    "conjugate-shuffle2" => Ok(NamedStrategy::conjugate_shuffled(inner()?, Shuffle::Two)),
                    other => Err(ApiError::bad_request(
                        "UnknownPreset",
                        format!("unknown strategy preset {other:?}"),
                    )),
                }
            }
            StrategySpecWire::Params { params } => Ok(NamedStrategy::Params(Su3Params::new(*params))),
            StrategySpecWire::Matrix { matrix } => {
                let op = op_from_wire(matrix);
                op.check_special_unitary(UNITARY_TOL)?;
                Ok(NamedStrategy::Matrix(op))
            }
        }
    }

    pub fn from_strategy(s: &NamedStrategy) -> Self {
        let wrap = |name: &str, of: &NamedStrategy| StrategySpecWire::Preset {
            preset: name.into(),
            of: Some(Box::new(StrategySpecWire::from_strategy(of))),
        };
        match s {
            NamedStrategy::Identity => Self::preset("identity"),
            NamedStrategy::Shuffle1 => Self::preset("shuffle1"),
            NamedStrategy::Shuffle2 => Self::preset("shuffle2"),
            NamedStrategy::FairH => Self::preset("fair-h"),
            NamedStrategy::Conjugate(of) => wrap("conjugate", of),
            NamedStrategy::ConjugateShuffled(of, Shuffle::One) => wrap("conjugate-shuffle1", of),
            NamedStrategy::ConjugateShuffled(of, Shuffle::Two) => wrap("conjugate-shuffle2", of),
            NamedStrategy::Params(p) => StrategySpecWire::Params { params: p.theta },
            NamedStrategy::Matrix(m) => StrategySpecWire::Matrix {
                matrix: op_to_wire(m),
            },
        }
    }
}

pub fn op_from_wire(m: &[[[f64; 2]; 3]; 3]) -> Op3 {
    Op3(m.map(|row| row.map(|[re, im]| Complex64::new(re, im))))
}

pub fn op_to_wire(m: &Op3) -> [[[f64; 2]; 3]; 3] {
    m.0.map(|row| row.map(|z| [z.re, z.im]))
}

/// One weighted component of a mixture.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedSpec {
    pub weight: f64,
    pub strategy: StrategySpecWire,
}

/// A pure strategy or a mixture of them. The string `"uniform-shuffles"` is
/// shorthand for the uniform mixture over identity, shuffle1 and shuffle2.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MixtureWire {
    Named(String),
    Mixture { mixture: Vec<WeightedSpec> },
    Pure(StrategySpecWire),
}

impl MixtureWire {
    pub fn to_mixture(&self) -> Result<MixedStrategy, ApiError> {
        match self {
            MixtureWire::Named(name) if name == "uniform-shuffles" => Ok(MixedStrategy::uniform_shuffles()),
            MixtureWire::Named(name) => Ok(MixedStrategy::pure(StrategySpecWire::preset(name).to_strategy()?)),
            MixtureWire::Mixture { mixture } => {
                let comps = mixture
                    .iter()
                    .map(|c| Ok((c.strategy.to_strategy()?, c.weight)))
                    .collect::<Result<Vec<_>, ApiError>>()?;
                Ok(MixedStrategy::new(comps)?)
            }
            MixtureWire::Pure(spec) => Ok(MixedStrategy::pure(spec.to_strategy()?)),
        }
    }
}

/// How Alice plays in a session.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlicePolicyWire {
    /// `"identity"`, `"fair-h"`, `"shuffle1"`, `"shuffle2"`,
    /// `"uniform-shuffles"` or `"adaptive-counter"`.
    Named(String),
    Fixed { fixed: StrategySpecWire },
    Mixture { mixture: Vec<WeightedSpec> },
}

pub const POLICY_PRESETS: [&str; 6] = [
    "identity",
    "fair-h",
    "shuffle1",
    "shuffle2",
    "uniform-shuffles",
    "adaptive-counter",
];

impl AlicePolicyWire {
    pub fn to_policy(&self) -> Result<AlicePolicy, ApiError> {
        match self {
            AlicePolicyWire::Named(name) => match name.as_str() {
                "adaptive-counter" => Ok(AlicePolicy::AdaptiveCounter),
                "uniform-shuffles" => Ok(AlicePolicy::Mixed(MixedStrategy::uniform_shuffles())),
                "identity" | "fair-h" | "shuffle1" | "shuffle2" => {
                    Ok(AlicePolicy::Fixed(StrategySpecWire::preset(name).to_strategy()?))
                }
                other => Err(ApiError::bad_request(
                    "UnknownPolicy",
                    format!("unknown Alice policy {other:?}"),
                )),
            },
            AlicePolicyWire::Fixed { fixed } => {
                let s = fixed.to_strategy()?;
                s.resolve()?;
                Ok(AlicePolicy::Fixed(s))
            }
            AlicePolicyWire::Mixture { mixture } => {
                let m = MixtureWire::Mixture {
                    mixture: mixture.clone(),
                }
                .to_mixture()?;
                m.resolve()?;
                Ok(AlicePolicy::Mixed(m))
            }
        }
    }
}

/// Checks `γ ∈ [0, π/2]` up to rounding slack, as the engine does.
pub fn check_gamma(gamma: f64) -> Result<f64, ApiError> {
    let slack = qmh::game::GAMMA_SLACK;
    if gamma.is_finite() && (-slack..=std::f64::consts::FRAC_PI_2 + slack).contains(&gamma) {
        Ok(gamma)
    } else {
        Err(EngineError::GammaOutOfRange(gamma).into())
    }
}

/// Body of `POST /api/payoff`; the command line builds the same value from
/// its flags.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PayoffRequest {
    pub regime: InitialStateRegime,
    pub alice: MixtureWire,
    pub bob: MixtureWire,
    pub gamma: f64,
    #[serde(default)]
    pub mode: PayoffMode,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PayoffResponse {
    pub bob: f64,
    pub alice: f64,
    pub final_norm2: f64,
    pub mode: PayoffMode,
    pub regime: String,
    pub gamma: f64,
}

impl PayoffRequest {
    pub fn evaluate(&self) -> Result<PayoffResponse, ApiError> {
        let alice = self.alice.to_mixture()?;
        let bob = self.bob.to_mixture()?;
        let gamma = check_gamma(self.gamma)?;
        let PayoffResult {
            bob,
            alice,
            final_norm2,
        } = qmh::strategy::mixed_payoff(&self.regime, &alice, &bob, gamma, self.mode)?;
        Ok(PayoffResponse {
            bob,
            alice,
            final_norm2,
            mode: self.mode,
            regime: self.regime.label().into(),
            gamma,
        })
    }
}

/// Body of `POST /api/best-response`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BestResponseRequest {
    pub respond_as: qmh::equilibrium::Player,
    pub regime: InitialStateRegime,
    /// The fixed opponent: Alice's strategy or mixture when Bob responds,
    /// Bob's when Alice responds.
    pub opponent: MixtureWire,
    /// Bob's switch parameter; required when Alice responds.
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub mode: PayoffMode,
    #[serde(default)]
    pub starts: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
}

/// Upper bound on search starts accepted from a request.
pub const MAX_STARTS: usize = 512;

impl BestResponseRequest {
    pub fn run(&self) -> Result<BestResponseResult, ApiError> {
        use qmh::equilibrium::{best_response_alice, best_response_bob, Player, SearchOptions};
        let opponent = self.opponent.to_mixture()?;
        let defaults = SearchOptions::default();
        let starts = self.starts.unwrap_or(defaults.starts);
        if starts == 0 || starts > MAX_STARTS {
            return Err(ApiError::bad_request(
                "InvalidArgument",
                format!("starts must lie in 1..={MAX_STARTS}"),
            ));
        }
        let opts = SearchOptions {
            starts,
            seed: self.seed.unwrap_or(defaults.seed),
            ..defaults
        };
        Ok(match self.respond_as {
            Player::Bob => {
                if self.gamma.is_some() {
                    return Err(ApiError::bad_request(
                        "UnexpectedField",
                        "gamma is chosen by the search when Bob responds",
                    ));
                }
                best_response_bob(&self.regime, &opponent, self.mode, &opts)?
            }
            Player::Alice => {
                let gamma = self.gamma.ok_or_else(|| {
                    ApiError::bad_request("MissingField", "gamma is required when Alice responds")
                })?;
                best_response_alice(&self.regime, &opponent, check_gamma(gamma)?, self.mode, &opts)?
            }
        })
    }
}
