//! Game description files and the command-line front end.

pub mod cli;
pub mod document;
pub mod json;
pub mod registry;

pub use document::{
    isomorphic, parse, serialize, serialize_built, serialize_game, DocError, DocErrorKind,
    GameDocument,
};
pub use registry::{generate, Built};
