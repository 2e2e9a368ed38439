//! Exact equilibrium analysis and behavioral simulation of finite-round,
//! three-player majority bargaining.
//!
//! The crate is organised around the life cycle of a treatment:
//!
//! - [`game`] defines the bargaining model: players, disclosure protocols,
//!   recognition models, allocations and the information states reachable in
//!   each round.
//! - [`spe`] solves the game by backward induction in exact rational
//!   arithmetic and classifies weak and strong coalition partners.
//! - [`belief`] optimizes a proposer's offer when she is uncertain about the
//!   acceptance thresholds of the two other players.
//! - [`sim`] runs seeded matches with pluggable proposer and voter agents and
//!   produces [`sim::MatchLog`]s.
//! - [`empirics`] turns match logs into coalition tables, Gini statistics,
//!   logit voting models, payoff surfaces and optimization rates.
//! - [`presets`] and [`config`] ship the treatment, coefficient and rejection
//!   payoff tables, and read and write the configuration files.
//! - [`reproduce`] evaluates the full checklist of reference results.

pub mod belief;
pub mod config;
pub mod empirics;
pub mod game;
pub mod presets;
pub mod rational;
pub mod reproduce;
pub mod sim;
pub mod spe;

pub use game::{Allocation, Disclosure, GameError, GameSpec, InfoProtocol, InfoState, Player, RecognitionModel};
pub use rational::Q;
