//! A workbench for groups with computable word problem: fellow-traveler
//! witness automata, synchronously regular convergent prefix-rewriting
//! systems, the bounded-system transformation, geodesic flow functions, and
//! almost-convexity paths — each construction verifiable against brute-force
//! oracles on Cayley balls.

pub mod builtin;
pub mod cli;
pub mod cprs;
pub mod error;
pub mod exec;
pub mod fftp;
pub mod fsa;
pub mod group;
pub mod synclang;
pub mod words;

pub use error::{Error, Result};
