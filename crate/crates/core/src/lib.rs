//! Gate-elimination refuters and checkers for small Boolean circuits.
//!
//! Given a circuit that is too small to compute parity, the multiplexer, or an
//! affine disperser, the routines here produce a concrete reason: an input on
//! which the circuit is wrong, or an affine subspace on which it is constant.

pub mod affine;
pub mod circuit;
pub mod error;
pub mod gf2;
pub mod harness;
pub mod mux;
pub mod rewrite;
pub mod trace;
pub mod xor;

pub use affine::{find_constant_subspace, find_substitution, parity_support, AffineInstance, ConstantSubspaceResult};
pub use circuit::{Assignment, Basis, Circuit, CircuitBuilder, Gate, GateKind, InputLayout, Measures, Node, TruthTable};
pub use error::{Error, Result};
pub use gf2::{affine_intersect, constraint_to_affine, AffineSubspace, BitMatrix, BitVec};
pub use mux::{mux_refute, MuxInstance, MuxWitness};
pub use rewrite::{normalize, normalized, RewriteLog};
pub use trace::{RefutationTrace, TraceStep};
pub use xor::{detect_xor, xor_check, xor_refute, Witness, XorInstance, XorVerdict};
