//! ZX-calculus compiler and simulator for multi-agent blind measurement-based
//! quantum computation.
//!
//! The pipeline runs circuit → graph-like diagram → obfuscated multi-block
//! diagram → per-agent measurement schedules, with Pauli-flow verification,
//! blindness auditing and resource accounting along the way.

pub mod audit;
pub mod circuit;
pub mod diagram;
pub mod error;
pub mod flow;
mod gf2;
pub mod graphlike;
pub mod io;
pub mod obfuscate;
pub mod phase;
pub mod resources;
pub mod rewrite;
pub mod runtime;
pub mod sim;
pub mod stats;
pub mod tensor;

pub use circuit::{from_circuit, Circuit, Gate, GateKind};
pub use diagram::{Boundary, Color, EdgeKind, IoRole, Spider, SpiderId, Wire, ZXDiagram};
pub use error::{Error, ParseError, Result};
pub use phase::Phase;
