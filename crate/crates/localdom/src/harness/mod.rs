//! Random games and claim verification.

pub mod claims;
pub mod random;

pub use claims::{verify_on_game, verify_random, Claim, TheoremReport, Verdict};
pub use random::{random_game, random_game_with_caps, RandomGameSpec};
