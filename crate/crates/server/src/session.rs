//! In-memory play sessions behind the HTTP API.
//!
//! Each session is a [`Match`] with a human Bob. Rounds on one session are
//! serialized by its own mutex; the map lock is held only to look sessions
//! up, so distinct sessions proceed in parallel.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::sync::{Arc, Mutex, RwLock};

use qmh::play::{GameOutcome, Match, MatchConfig, RoundRecord};
use qmh::{Branch, InitialStateRegime, Op3, PayoffMode};
use serde::{Deserialize, Serialize};

use crate::error::{ApiError, ErrorKind};
use crate::wire::{check_gamma, AlicePolicyWire, StrategySpecWire, WIRE_VERSION};

/// Body of `POST /api/session`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    pub regime: InitialStateRegime,
    pub alice_policy: AlicePolicyWire,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub mode: PayoffMode,
    /// Reveal Alice's operator after each round. Defaults to true.
    #[serde(default = "yes")]
    pub reveal: bool,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionCreated {
    pub session_id: String,
    pub seed: u64,
    pub next_round: u64,
}

/// Body of `POST /api/session/{id}/round`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoundRequest {
    pub bob: StrategySpecWire,
    pub gamma: f64,
    /// The round this move is meant for. A mismatch with the session's
    /// counter is a conflict, which makes resubmission safe.
    #[serde(default)]
    pub round: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scores {
    pub bob: u64,
    pub alice: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeWire {
    pub o: usize,
    pub b: usize,
    pub a: usize,
    pub bob_wins: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub branch: Option<Branch>,
}

impl From<&GameOutcome> for OutcomeWire {
    fn from(o: &GameOutcome) -> Self {
        OutcomeWire {
            o: o.o,
            b: o.b,
            a: o.a,
            bob_wins: o.bob_wins,
            branch: o.branch,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RevealedWire {
    pub label: String,
    pub matrix: Op3,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundResponse {
    pub round: u64,
    pub outcome: OutcomeWire,
    pub expected_payoff: f64,
    pub scores: Scores,
    /// `null` when the session hides Alice's play.
    pub alice_revealed: Option<RevealedWire>,
    pub next_round: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub round: u64,
    pub bob_strategy: String,
    pub bob: Op3,
    pub gamma: f64,
    pub outcome: OutcomeWire,
    pub expected_payoff: f64,
    pub alice_revealed: Option<RevealedWire>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RngState {
    pub algorithm: String,
    pub seed: u64,
    /// Stream used by the next round.
    pub next_stream: u64,
}

/// Response of `GET /api/session/{id}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionState {
    pub version: String,
    pub session_id: String,
    pub config: MatchConfig,
    pub alice_policy: String,
    pub reveal: bool,
    /// Number of the next round.
    pub round_counter: u64,
    pub scores: Scores,
    pub rng: RngState,
    pub history: Vec<HistoryEntry>,
}

pub struct Session {
    id: String,
    game: Match,
    reveal: bool,
    transcript: Option<BufWriter<File>>,
}

impl Session {
    fn revealed(&self, r: &RoundRecord) -> Option<RevealedWire> {
        self.reveal.then(|| RevealedWire {
            label: r.alice_strategy.clone(),
            matrix: r.alice,
        })
    }

    fn scores(&self) -> Scores {
        let (bob, alice) = self.game.scores();
        Scores { bob, alice }
    }

    pub fn state(&self) -> SessionState {
        SessionState {
            version: WIRE_VERSION.into(),
            session_id: self.id.clone(),
            config: self.game.config().clone(),
            alice_policy: self.game.alice_policy().label(),
            reveal: self.reveal,
            round_counter: self.game.next_round(),
            scores: self.scores(),
            rng: RngState {
                algorithm: "chacha8".into(),
                seed: self.game.seed(),
                next_stream: self.game.next_round(),
            },
            history: self
                .game
                .rounds()
                .iter()
                .map(|r| HistoryEntry {
                    round: r.round,
                    bob_strategy: r.bob_strategy.clone(),
                    bob: r.bob,
                    gamma: r.gamma,
                    outcome: (&r.outcome).into(),
                    expected_payoff: r.outcome.expected_bob,
                    alice_revealed: self.revealed(r),
                })
                .collect(),
        }
    }

    pub fn play(&mut self, req: &RoundRequest) -> Result<RoundResponse, ApiError> {
        let expected = self.game.next_round();
        if let Some(round) = req.round {
            if round != expected {
                return Err(ApiError::new(
                    ErrorKind::Conflict,
                    "RoundConflict",
                    format!("round {round} submitted but the session is at round {expected}"),
                ));
            }
        }
        let strategy = req.bob.to_strategy()?;
        let gamma = check_gamma(req.gamma)?;
        let record = self.game.play_round_with(&strategy, gamma)?.clone();
        if let Some(w) = self.transcript.as_mut() {
            let line = serde_json::to_string(&record).expect("records serialize");
            // persistence is best effort; the in-memory session stays authoritative
            let _ = writeln!(w, "{line}").and_then(|_| w.flush());
        }
        Ok(RoundResponse {
            round: record.round,
            outcome: (&record.outcome).into(),
            expected_payoff: record.outcome.expected_bob,
            scores: self.scores(),
            alice_revealed: self.revealed(&record),
            next_round: self.game.next_round(),
        })
    }
}

#[derive(Default)]
pub struct SessionStore {
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
    transcript_dir: Option<PathBuf>,
}

fn unknown(id: &str) -> ApiError {
    ApiError::new(ErrorKind::NotFound, "UnknownSession", format!("no session {id:?}"))
}

impl SessionStore {
    pub fn new(transcript_dir: Option<PathBuf>) -> Self {
        SessionStore {
            sessions: RwLock::default(),
            transcript_dir,
        }
    }

    pub fn create(&self, req: &CreateSession) -> Result<SessionCreated, ApiError> {
        let policy = req.alice_policy.to_policy()?;
        let id = uuid::Uuid::new_v4().simple().to_string();
        let seed = req.seed.unwrap_or_else(|| uuid::Uuid::new_v4().as_u64_pair().0);
        let config = MatchConfig {
            regime: req.regime.clone(),
            mode: req.mode,
        };
        let game = Match::new(config, policy, seed)?;
        let transcript = match &self.transcript_dir {
            Some(dir) => {
                let path = dir.join(format!("{id}.jsonl"));
                let f = OpenOptions::new().create(true).append(true).open(&path).map_err(|e| {
                    ApiError::new(
                        ErrorKind::Internal,
                        "TranscriptIo",
                        format!("cannot open {}: {e}", path.display()),
                    )
                })?;
                Some(BufWriter::new(f))
            }
            None => None,
        };
        let session = Session {
            id: id.clone(),
            game,
            reveal: req.reveal,
            transcript,
        };
        self.sessions
            .write()
            .expect("session map lock")
            .insert(id.clone(), Arc::new(Mutex::new(session)));
        Ok(SessionCreated {
            session_id: id,
            seed,
            next_round: 1,
        })
    }

    fn get(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        self.sessions
            .read()
            .expect("session map lock")
            .get(id)
            .cloned()
            .ok_or_else(|| unknown(id))
    }

    pub fn state(&self, id: &str) -> Result<SessionState, ApiError> {
        Ok(self.get(id)?.lock().expect("session lock").state())
    }

    pub fn play(&self, id: &str, req: &RoundRequest) -> Result<RoundResponse, ApiError> {
        self.get(id)?.lock().expect("session lock").play(req)
    }

    pub fn delete(&self, id: &str) -> Result<(), ApiError> {
        self.sessions
            .write()
            .expect("session map lock")
            .remove(id)
            .map(|_| ())
            .ok_or_else(|| unknown(id))
    }

    pub fn len(&self) -> usize {
        self.sessions.read().expect("session map lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
