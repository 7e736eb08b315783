//! ω-languages of pushdown machines at desk scale: lassos, grammars, Büchi and
//! Muller acceptors, ω-Kleene expressions, binary-tree codings and the
//! branch-guessing pushdown construction.

pub mod bar;
pub mod cli;
pub mod error;
pub mod fsa;
pub mod grammar;
pub mod kleene;
pub mod oracle;
pub mod graph;
pub mod pda;
pub mod tree;
pub mod verify;
pub mod words;

pub use error::{Error, Result};
