//! Finding affine subspaces on which a small B2 circuit is constant.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::circuit::{Basis, Circuit, CircuitBuilder, Gate, GateClass, Node, TruthTable};
use crate::error::{Error, Result};
use crate::gf2::{affine_intersect, constraint_to_affine, AffineSubspace, BitVec};
use crate::rewrite::{fixing_value, normalized, replace_gate_with_const, splice, substitute_const};
use crate::trace::RefutationTrace;

/// Subspaces up to this dimension are checked point by point.
pub const EXHAUSTIVE_DIM: usize = 12;
/// Random points checked on larger subspaces.
pub const SAMPLE_POINTS: usize = 10_000;

#[derive(Clone, Debug)]
pub struct AffineInstance {
    pub circuit: Circuit,
    pub subspace: AffineSubspace,
    /// Target dimension `d`.
    pub d: usize,
}

impl AffineInstance {
    /// The whole space `GF(2)^n` as the ambient subspace.
    pub fn full(circuit: Circuit, d: usize) -> Self {
        let n = circuit.num_inputs();
        AffineInstance {
            circuit,
            subspace: AffineSubspace::full(n),
            d,
        }
    }
}

/// How constancy of the result was confirmed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verification {
    pub exhaustive: bool,
    pub points: usize,
}

#[derive(Clone, Debug)]
pub struct ConstantSubspaceResult {
    pub subspace: AffineSubspace,
    pub value: bool,
    pub trace: RefutationTrace,
    pub verification: Verification,
}

fn is_parity_gate(c: &Circuit, fanouts: &crate::circuit::Fanouts, id: usize, g: &Gate) -> bool {
    g.kind().class() == Some(GateClass::XorType) && fanouts.gate(id) == 1 && c.basis() == Basis::B2
}

/// `(I, c)` with the circuit computing `⊕_{i∈I} x_i ⊕ c`, for circuits made
/// only of fanout-1 ⊕-type gates.
pub fn parity_support(circuit: &Circuit) -> Result<(Vec<usize>, bool)> {
    let fanouts = circuit.fanouts();
    if let Some((id, _)) = circuit
        .gates()
        .iter()
        .enumerate()
        .find(|&(id, g)| !is_parity_gate(circuit, &fanouts, id, g))
    {
        return Err(Error::precondition(format!(
            "g{} is not a fanout-1 parity gate",
            id + 1
        )));
    }
    let indices = (1..=circuit.num_inputs())
        .filter(|&i| fanouts.input(i) % 2 == 1)
        .collect();
    let c = circuit.eval_unchecked(&vec![false; circuit.num_inputs()]);
    Ok((indices, c))
}

/// A parity circuit `s` over `I ∖ {j}` such that substituting `x_j ← s`
/// makes `circuit` output `b`; `j` is the least index of `I`.
pub fn find_substitution(circuit: &Circuit, b: bool) -> Result<(Circuit, usize)> {
    let (indices, c) = parity_support(circuit)?;
    let Some((&j, rest)) = indices.split_first() else {
        return Err(Error::precondition("circuit is constant"));
    };
    Ok((parity_chain(circuit, rest, c ^ b), j))
}

/// `⊕_{i∈I} x_i ⊕ c` as a chain of XOR gates (a constant when `I` is empty).
fn parity_chain(like: &Circuit, indices: &[usize], c: bool) -> Circuit {
    let mut b = CircuitBuilder::new(Basis::B2, like.layout());
    let Some((&first, rest)) = indices.split_first() else {
        return b.build(Node::Const(c));
    };
    let mut acc = Node::Input(first);
    for &i in rest {
        acc = b.table(TruthTable::XOR, acc, Node::Input(i));
    }
    b.build_negated(acc, c)
}

/// The value of `⊕_{i∈I} x_i` on `s` when it is constant there.
fn form_on(s: &AffineSubspace, indices: &[usize]) -> Option<bool> {
    let mut form = BitVec::zeros(s.ambient());
    for &i in indices {
        form.flip(i - 1);
    }
    let moves = s.direction().columns().iter().any(|col| form.dot(col));
    (!moves).then(|| form.dot(s.offset()))
}

struct Search {
    circuit: Circuit,
    subspace: AffineSubspace,
    depth: usize,
    trace: RefutationTrace,
}

enum Step {
    Done(bool),
    /// A substitution that cost no dimension.
    Free(Circuit),
    /// A substitution valid on the intersection with a hyperplane.
    Cut(Circuit, AffineSubspace),
}

impl Search {
    fn hyperplane(&self, indices: &[usize], c: bool) -> Result<AffineSubspace> {
        constraint_to_affine(indices, c, self.subspace.ambient())
    }

    fn step(&mut self) -> Result<Step> {
        let c = &self.circuit;
        if let Some(v) = c.constant_output() {
            return Ok(Step::Done(v));
        }
        let fanouts = c.fanouts();
        let parity = |id: usize, g: &Gate| is_parity_gate(c, &fanouts, id, g);
        if c.gates().iter().enumerate().all(|(id, g)| parity(id, g)) {
            let (indices, k) = parity_support(c)?;
            if let Some(v) = form_on(&self.subspace, &indices) {
                self.note("parity-constant", format!("parity over {indices:?} is constant here"));
                return Ok(Step::Done(v ^ k));
            }
            let h = self.hyperplane(&indices, k)?;
            let next = affine_intersect(&self.subspace, &h)?;
            self.note("parity", format!("constrain parity over {indices:?} to {}", k as u8));
            self.subspace = next;
            return Ok(Step::Done(false));
        }

        let alpha = c
            .minimal_gate(|id, g| !parity(id, g))
            .ok_or_else(|| Error::bug("no gate outside the parity part", &self.trace))?;
        let g = *c.gate(alpha);

        if g.kind().class() == Some(GateClass::XorType) {
            let p = c.induced_subcircuit(alpha);
            let (indices, k) = parity_support(&p)?;
            if let Some(v) = form_on(&self.subspace, &indices) {
                let next = replace_gate_with_const(c, alpha, v ^ k)?;
                self.record("case2-constant", format!("g{} is constant {} here", alpha + 1, (v ^ k) as u8), &next);
                return Ok(Step::Free(next));
            }
            let (s, j) = find_substitution(&p, false)?;
            let (spliced, offset) = splice(c, j, &s)?;
            let next = replace_gate_with_const(&spliced, alpha + offset, false)?;
            let h = self.hyperplane(&indices, k)?;
            self.record("case2", format!("x{j} <- parity, g{} <- 0", alpha + 1), &next);
            return Ok(Step::Cut(next, h));
        }

        let xor_slot = g.sources().iter().enumerate().find_map(|(slot, &s)| match s {
            Node::Gate(b) if c.gate(b).kind().class() == Some(GateClass::XorType) => Some((slot, b)),
            _ => None,
        });
        if let Some((slot, beta)) = xor_slot {
            let (cp, _) = fixing_value(g.kind(), slot)
                .ok_or_else(|| Error::bug(format!("g{} has no fixing constant", alpha + 1), &self.trace))?;
            let q = c.induced_subcircuit(beta);
            let (indices, k) = parity_support(&q)?;
            if let Some(v) = form_on(&self.subspace, &indices) {
                let next = replace_gate_with_const(c, beta, v ^ k)?;
                self.record("case3-constant", format!("g{} is constant {} here", beta + 1, (v ^ k) as u8), &next);
                return Ok(Step::Free(next));
            }
            let (s, j) = find_substitution(&q, cp)?;
            let (spliced, offset) = splice(c, j, &s)?;
            let next = replace_gate_with_const(&spliced, beta + offset, cp)?;
            let h = self.hyperplane(&indices, k ^ cp)?;
            self.record(
                "case3",
                format!("x{j} <- parity, g{} <- {} fixes g{}", beta + 1, cp as u8, alpha + 1),
                &next,
            );
            return Ok(Step::Cut(next, h));
        }

        let vars: Vec<(usize, usize)> = g
            .sources()
            .iter()
            .enumerate()
            .filter_map(|(slot, &s)| match s {
                Node::Input(i) => Some((slot, i)),
                _ => None,
            })
            .collect();
        let &(slot, j) = vars
            .iter()
            .max_by_key(|&&(_, i)| (fanouts.input(i), std::cmp::Reverse(i)))
            .filter(|_| vars.len() == 2)
            .ok_or_else(|| Error::bug(format!("g{} is not fed by two variables", alpha + 1), &self.trace))?;
        let (cp, _) = fixing_value(g.kind(), slot)
            .ok_or_else(|| Error::bug(format!("g{} has no fixing constant", alpha + 1), &self.trace))?;
        if let Some(v) = form_on(&self.subspace, &[j]) {
            let next = substitute_const(c, j, v)?;
            self.record("case4-constant", format!("x{j} is constant {} here", v as u8), &next);
            return Ok(Step::Free(next));
        }
        let next = substitute_const(c, j, cp)?;
        let h = self.hyperplane(&[j], cp)?;
        self.record("case4", format!("x{j} <- {} fixes g{}", cp as u8, alpha + 1), &next);
        Ok(Step::Cut(next, h))
    }

    fn note(&mut self, case: &str, note: String) {
        let m = self.circuit.measures();
        self.trace.push(self.depth, case, note, m, m);
    }

    fn record(&mut self, case: &str, note: String, after: &Circuit) {
        let before = self.circuit.measures();
        self.trace.push(self.depth, case, note, before, after.measures());
    }

    fn run(&mut self) -> Result<bool> {
        loop {
            let before = self.circuit.measures().mu;
            match self.step()? {
                Step::Done(v) => return Ok(v),
                Step::Free(next) => {
                    if next.measures().mu >= before {
                        return Err(Error::bug("substitution did not shrink the circuit", &self.trace));
                    }
                    self.circuit = next;
                }
                Step::Cut(next, h) => {
                    let after = next.measures().mu;
                    if next.constant_output().is_none() && after + 4 > before {
                        return Err(Error::bug(
                            format!("measure went from {before} to {after}, expected a drop of 4"),
                            &self.trace,
                        ));
                    }
                    self.subspace = affine_intersect(&self.subspace, &h)?;
                    self.circuit = next;
                }
            }
            self.depth += 1;
        }
    }
}

/// Checks that `circuit` is `value` on `s`: every point up to dimension
/// [`EXHAUSTIVE_DIM`], else [`SAMPLE_POINTS`] random points.
pub fn verify_constant(circuit: &Circuit, s: &AffineSubspace, value: bool, seed: u64) -> Result<Verification> {
    if s.ambient() != circuit.num_inputs() {
        return Err(Error::input("subspace and circuit have different ambient dimensions"));
    }
    let n = s.ambient();
    let cols = s.direction().columns();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let exhaustive = s.dim() <= EXHAUSTIVE_DIM;
    let total = if exhaustive { 1usize << s.dim() } else { SAMPLE_POINTS };
    let want = if value { u64::MAX } else { 0 };
    let mut done = 0;
    while done < total {
        let lanes = (total - done).min(64);
        let mut words = vec![0u64; n];
        for lane in 0..lanes {
            let mut p = s.offset().clone();
            for (k, col) in cols.iter().enumerate() {
                let bit = if exhaustive {
                    ((done + lane) >> k) & 1 == 1
                } else {
                    rng.gen()
                };
                if bit {
                    p.xor_assign(col);
                }
            }
            for i in p.ones() {
                words[i] |= 1 << lane;
            }
        }
        let mask = if lanes == 64 { u64::MAX } else { (1u64 << lanes) - 1 };
        if (circuit.evaluate_words(&words)? ^ want) & mask != 0 {
            return Err(Error::Bug {
                message: "circuit is not constant on the returned subspace".into(),
                trace: RefutationTrace::new(),
            });
        }
        done += lanes;
    }
    Ok(Verification { exhaustive, points: total })
}

/// Finds an affine subspace of dimension at least `d` inside `S` on which the
/// circuit is constant, given `μ < 4(dim S − d)` or `μ = 1`.
pub fn find_constant_subspace(inst: &AffineInstance) -> Result<ConstantSubspaceResult> {
    let c = &inst.circuit;
    if c.basis() != Basis::B2 {
        return Err(Error::input("affine refutation expects a B2 circuit"));
    }
    if let Err(errs) = c.validate() {
        return Err(Error::input(format!("invalid circuit: {}", errs[0])));
    }
    if inst.subspace.ambient() != c.num_inputs() {
        return Err(Error::input(format!(
            "subspace lives in dimension {}, circuit has {} inputs",
            inst.subspace.ambient(),
            c.num_inputs()
        )));
    }
    let dim = inst.subspace.dim();
    if dim <= inst.d {
        return Err(Error::precondition(format!(
            "subspace dimension {dim} must exceed the target {}",
            inst.d
        )));
    }
    let circuit = normalized(c);
    let mu = circuit.measures().mu;
    if mu >= 4 * (dim - inst.d) && mu != 1 {
        return Err(Error::precondition(format!(
            "measure {mu} is not below 4({dim} - {}) = {}",
            inst.d,
            4 * (dim - inst.d)
        )));
    }

    let mut search = Search {
        circuit,
        subspace: inst.subspace.clone(),
        depth: 0,
        trace: RefutationTrace::new(),
    };
    let value = search.run()?;
    let Search { subspace, trace, .. } = search;
    if subspace.dim() < inst.d {
        return Err(Error::bug(
            format!("subspace shrank to dimension {}, target {}", subspace.dim(), inst.d),
            &trace,
        ));
    }
    if !subspace.is_subset_of(&inst.subspace)? {
        return Err(Error::bug("result is not inside the ambient subspace", &trace));
    }
    let verification = verify_constant(c, &subspace, value, 0).map_err(|e| match e {
        Error::Bug { message, .. } => Error::Bug { message, trace: trace.clone() },
        other => other,
    })?;
    Ok(ConstantSubspaceResult {
        subspace,
        value,
        trace,
        verification,
    })
}
