//! Parameterized generators for the worked mechanisms.

pub mod ausubel;
pub mod centipede;
pub mod grab_or_nab;
pub mod herding;
pub mod japanese;
pub mod ttc;

use thiserror::Error;

use crate::flow_games::FlowError;
use crate::game_core::{GameError, Rational};

pub use ausubel::{gen_ausubel, AusubelParams};
pub use centipede::gen_centipede;
pub use grab_or_nab::{gen_grab_or_nab, gen_grab_or_nab_stage};
pub use herding::{gen_herding, herding_partition, HerdingParams};
pub use japanese::{gen_japanese, JapaneseParams};
pub use ttc::{gen_ttc_direct, gen_ttc_dynamic, ttc_reference_allocation, TtcDynamicParams};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MechanismError {
    #[error("bad grid: {0}")]
    BadGrid(String),
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("marginal valuations must be non-increasing: {0}")]
    NonMonotoneValuations(String),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Flow(#[from] FlowError),
}

pub(crate) fn label_rational(r: &Rational) -> String {
    crate::game_core::format_rational(r)
}

pub(crate) fn join<T: ToString>(xs: &[T], sep: &str) -> String {
    xs.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(sep)
}

/// Item or letter name for index `k` (`a`, `b`, ...).
pub(crate) fn letter(k: usize) -> String {
    if k < 26 {
        ((b'a' + k as u8) as char).to_string()
    } else {
        format!("x{k}")
    }
}
