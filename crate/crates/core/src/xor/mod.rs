//! Refuting and checking DeMorgan circuits that claim to compute parity.

mod check;
mod refute;
mod widgets;

use serde::Serialize;

pub use check::xor_check;
pub use refute::xor_refute;
pub use widgets::{
    detect_xor, enumerate_widgets, partition_into_widgets, widget_library, WGate, WRef, Widget,
    WidgetBlock, WidgetLibrary, WidgetPartition, XorVerdict,
};

use crate::circuit::{Assignment, Basis, Circuit};
use crate::error::{Error, Result};
use crate::trace::RefutationTrace;

/// A circuit together with the parity `XOR_I ⊕ c` it is checked against and
/// the ambient assignment used outside `I`.
#[derive(Clone, Debug)]
pub struct XorInstance {
    pub circuit: Circuit,
    /// 1-based, ascending, distinct.
    pub indices: Vec<usize>,
    /// The offset `c`.
    pub negated: bool,
    pub ambient: Vec<bool>,
}

impl XorInstance {
    /// `XOR` over all inputs with a zero ambient assignment.
    pub fn new(circuit: Circuit, negated: bool) -> Self {
        let n = circuit.num_inputs();
        XorInstance {
            circuit,
            indices: (1..=n).collect(),
            negated,
            ambient: vec![false; n],
        }
    }

    fn validate(&self) -> Result<()> {
        let n = self.circuit.num_inputs();
        if self.circuit.basis() != Basis::DeMorgan {
            return Err(Error::input("xor refutation expects a DeMorgan circuit"));
        }
        if let Err(errs) = self.circuit.validate() {
            return Err(Error::input(format!("invalid circuit: {}", errs[0])));
        }
        if self.ambient.len() != n {
            return Err(Error::input(format!(
                "ambient assignment has {} bits, circuit has {n} inputs",
                self.ambient.len()
            )));
        }
        if self.indices.is_empty() {
            return Err(Error::input("empty index set"));
        }
        if self.indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::input("index set must be strictly ascending"));
        }
        if self.indices.iter().any(|&i| i == 0 || i > n) {
            return Err(Error::input(format!("index outside [1, {n}]")));
        }
        Ok(())
    }
}

/// A counterexample with the evaluations that prove it.
#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub bits: Assignment,
    pub circuit_output: bool,
    pub spec_output: bool,
    pub trace: RefutationTrace,
}

pub(crate) fn parity(indices: &[usize], c: bool, x: &[bool]) -> bool {
    indices.iter().fold(c, |acc, &i| acc ^ x[i - 1])
}

/// Entry checks shared by the refuter and the checker: returns the
/// normalized circuit.
fn prepare(inst: &XorInstance) -> Result<Circuit> {
    inst.validate()?;
    let c = crate::rewrite::normalized(&inst.circuit);
    if let Some(stray) = c.read_inputs().into_iter().find(|i| inst.indices.binary_search(i).is_err()) {
        return Err(Error::precondition(format!(
            "circuit reads x{stray}, which is outside the index set"
        )));
    }
    Ok(c)
}

/// Re-checks a witness against the caller's circuit.
fn finish(inst: &XorInstance, bits: Vec<bool>, trace: RefutationTrace) -> Result<Witness> {
    let circuit_output = inst.circuit.evaluate(&bits)?;
    let spec_output = parity(&inst.indices, inst.negated, &bits);
    if circuit_output == spec_output {
        return Err(Error::bug("returned input does not refute the circuit", &trace));
    }
    if inst
        .ambient
        .iter()
        .zip(&bits)
        .enumerate()
        .any(|(k, (a, w))| a != w && inst.indices.binary_search(&(k + 1)).is_err())
    {
        return Err(Error::bug("witness changed a bit outside the index set", &trace));
    }
    Ok(Witness {
        bits: Assignment(bits),
        circuit_output,
        spec_output,
        trace,
    })
}
