//! Exact local-dominance analysis of finite multistage games.
//!
//! Games are explicit trees with an initial move of nature, simultaneous
//! moves at every stage and perfect recall. On top of that representation the
//! crate decides global weak and obvious dominance, local dominance notions
//! under scenario partitions, end-dominance via the ending partition, and
//! stage-dominance for games whose outcomes mature stage by stage.

pub mod dominance;
pub mod ending_analysis;
pub mod flow_games;
pub mod game_core;
pub mod harness;
pub mod interface;
pub mod mechanisms;
pub mod strategy_space;

pub use game_core::{build_game, ActionId, Caps, Game, GameDef, GameError, NodeId, Rational, Slot};
pub use strategy_space::{ExternalState, LocalView, PlayerView, Strategy};
