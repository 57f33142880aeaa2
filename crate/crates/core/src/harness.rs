//! Brute-force oracles, witness checks and instance generators.

use std::collections::HashMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::circuit::{
    Assignment, Basis, Circuit, CircuitBuilder, Gate, GateClass, GateKind, InputLayout, Node,
    TruthTable,
};
use crate::error::{Error, Result};
use crate::gf2::{AffineSubspace, BitVec};
use crate::mux::{mux_size_bound, mux_spec};
use crate::rewrite::normalized;
use crate::xor::{detect_xor, widget_library, WRef, Widget, XorVerdict};

/// Largest input count [`truth_table`] accepts by default.
pub const DEFAULT_TABLE_CAP: usize = 16;

/// A target function a witness is checked against.
#[derive(Clone, Debug)]
pub enum SpecFunction {
    /// `⊕_{i∈I} x_i ⊕ c`, indices 1-based.
    Xor { indices: Vec<usize>, negated: bool },
    Mux { addr_bits: usize },
    ConstantOnSubspace { subspace: AffineSubspace, value: bool },
}

impl SpecFunction {
    pub fn xor_all(n: usize, negated: bool) -> Self {
        SpecFunction::Xor {
            indices: (1..=n).collect(),
            negated,
        }
    }

    pub fn arity(&self) -> Option<usize> {
        match self {
            SpecFunction::Xor { .. } => None,
            SpecFunction::Mux { addr_bits } => Some(addr_bits + (1 << addr_bits)),
            SpecFunction::ConstantOnSubspace { subspace, .. } => Some(subspace.ambient()),
        }
    }

    /// The required output at `x`; `None` when `x` lies outside the
    /// subspace of a [`SpecFunction::ConstantOnSubspace`].
    pub fn eval(&self, x: &[bool]) -> Result<Option<bool>> {
        match self {
            SpecFunction::Xor { indices, negated } => {
                if let Some(&i) = indices.iter().find(|&&i| i == 0 || i > x.len()) {
                    return Err(Error::input(format!("index {i} outside a {}-bit input", x.len())));
                }
                Ok(Some(indices.iter().fold(*negated, |acc, &i| acc ^ x[i - 1])))
            }
            SpecFunction::Mux { addr_bits } => {
                if x.len() < *addr_bits {
                    return Err(Error::input("input shorter than the address"));
                }
                let (a, d) = x.split_at(*addr_bits);
                mux_spec(a, d).map(Some)
            }
            SpecFunction::ConstantOnSubspace { subspace, value } => {
                if x.len() != subspace.ambient() {
                    return Err(Error::input(format!(
                        "input has {} bits, subspace lives in dimension {}",
                        x.len(),
                        subspace.ambient()
                    )));
                }
                Ok(subspace.contains(&BitVec::from_bools(x))?.then_some(*value))
            }
        }
    }
}

/// True iff the circuit and the spec disagree on `w`.
pub fn verify_witness(circuit: &Circuit, spec: &SpecFunction, w: &[bool]) -> Result<bool> {
    if let Some(k) = spec.arity() {
        if k != circuit.num_inputs() {
            return Err(Error::input(format!(
                "spec takes {k} inputs, circuit has {}",
                circuit.num_inputs()
            )));
        }
    }
    let out = circuit.evaluate(w)?;
    Ok(match spec.eval(w)? {
        Some(want) => out != want,
        None => false,
    })
}

/// A packed truth table, rows in increasing order with `x1` most significant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionTable {
    inputs: usize,
    words: Vec<u64>,
}

impl FunctionTable {
    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn rows(&self) -> usize {
        1 << self.inputs
    }

    pub fn get(&self, row: usize) -> bool {
        (self.words[row / 64] >> (row % 64)) & 1 == 1
    }

    /// Input assignment of `row`.
    pub fn assignment(&self, row: usize) -> Vec<bool> {
        row_bits(row, self.inputs)
    }

    /// Table of an arbitrary function over the same row order.
    pub fn from_fn(inputs: usize, f: impl Fn(&[bool]) -> bool) -> Self {
        let rows = 1usize << inputs;
        let mut words = vec![0u64; rows.div_ceil(64)];
        for r in 0..rows {
            if f(&row_bits(r, inputs)) {
                words[r / 64] |= 1 << (r % 64);
            }
        }
        FunctionTable { inputs, words }
    }

    /// First row where the two tables differ.
    pub fn first_difference(&self, other: &FunctionTable) -> Option<usize> {
        if self.inputs != other.inputs {
            return Some(0);
        }
        self.words
            .iter()
            .zip(&other.words)
            .enumerate()
            .find(|(_, (a, b))| a != b)
            .map(|(k, (a, b))| k * 64 + (a ^ b).trailing_zeros() as usize)
    }
}

impl fmt::Display for FunctionTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows() {
            f.write_str(if self.get(r) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

fn row_bits(row: usize, n: usize) -> Vec<bool> {
    (1..=n).map(|i| (row >> (n - i)) & 1 == 1).collect()
}

pub fn truth_table(circuit: &Circuit) -> Result<FunctionTable> {
    truth_table_capped(circuit, DEFAULT_TABLE_CAP)
}

/// Truth table for circuits with at most `cap` inputs.
pub fn truth_table_capped(circuit: &Circuit, cap: usize) -> Result<FunctionTable> {
    let n = circuit.num_inputs();
    if n > cap || n >= 48 {
        return Err(Error::Resource(format!(
            "truth table over {n} inputs exceeds the cap of {cap}"
        )));
    }
    let rows = 1usize << n;
    let mut words = vec![0u64; rows.div_ceil(64)];
    let mut x = vec![0u64; n];
    for (block, out) in words.iter_mut().enumerate() {
        let lanes = (rows - block * 64).min(64);
        for (k, w) in x.iter_mut().enumerate() {
            let shift = n - 1 - k;
            *w = (0..lanes).fold(0u64, |acc, lane| {
                acc | ((((block * 64 + lane) >> shift) & 1) as u64) << lane
            });
        }
        let mask = if lanes == 64 { u64::MAX } else { (1u64 << lanes) - 1 };
        *out = circuit.evaluate_words(&x)? & mask;
    }
    Ok(FunctionTable { inputs: n, words })
}

/// Parameters for [`random_circuit`].
#[derive(Clone, Debug)]
pub struct RandomCircuit {
    pub basis: Basis,
    pub inputs: usize,
    pub gates: usize,
    /// Allow constant sources.
    pub constants: bool,
    /// Allow NOT gates (DeMorgan only).
    pub not_gates: bool,
}

/// An arbitrary, typically unnormalized, circuit: duplicate sources,
/// constants and degenerate tables all occur.
pub fn random_circuit(spec: &RandomCircuit, seed: u64) -> Circuit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layout = InputLayout::Plain(spec.inputs);
    let mut b = CircuitBuilder::new(spec.basis, layout);
    let pick = |rng: &mut ChaCha8Rng, made: usize| -> Node {
        let consts = if spec.constants { 2 } else { 0 };
        let total = consts + spec.inputs + made;
        if total == 0 {
            return Node::Const(rng.gen());
        }
        let k = rng.gen_range(0..total);
        if k < consts {
            Node::Const(k == 1)
        } else if k < consts + spec.inputs {
            Node::Input(k - consts + 1)
        } else {
            Node::Gate(k - consts - spec.inputs)
        }
    };
    for made in 0..spec.gates {
        let a = pick(&mut rng, made);
        let c = pick(&mut rng, made);
        match spec.basis {
            Basis::DeMorgan => match rng.gen_range(0..if spec.not_gates { 5 } else { 4 }) {
                0 | 1 => b.and(a, c),
                2 | 3 => b.or(a, c),
                _ => b.not(a),
            },
            Basis::B2 => b.table(TruthTable::from_bits(rng.gen_range(0..16)), a, c),
        };
    }
    let out = if spec.gates > 0 && rng.gen_bool(0.8) {
        Node::Gate(spec.gates - 1)
    } else {
        pick(&mut rng, spec.gates)
    };
    let neg = spec.basis == Basis::B2 && rng.gen();
    b.build_negated(out, neg)
}

/// The recursive multiplexer `(¬a1 ∧ low) ∨ (a1 ∧ high)` with
/// `3(2^n − 1)` binary gates.
pub fn mux_circuit(n: usize) -> Circuit {
    fn build(b: &mut CircuitBuilder, k: usize, n: usize, lo: usize) -> Node {
        let a = b.addr(k);
        if k == n {
            let na = b.not(a);
            let l = b.and(na, b.data(lo));
            let h = b.and(a, b.data(lo + 1));
            return b.or(l, h);
        }
        let half = 1 << (n - k);
        let low = build(b, k + 1, n, lo);
        let high = build(b, k + 1, n, lo + half);
        let na = b.not(a);
        let l = b.and(na, low);
        let h = b.and(a, high);
        b.or(l, h)
    }
    let mut b = CircuitBuilder::new(Basis::DeMorgan, InputLayout::mux(n));
    let out = build(&mut b, 1, n, 1);
    b.build(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum GenKind {
    XorTree,
    SabotagedXorTree,
    UndersizedXor,
    MuxCandidate,
    RandomB2UnderMu,
}

impl std::str::FromStr for GenKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "xortree" => GenKind::XorTree,
            "sabotagedxortree" | "sabotaged" => GenKind::SabotagedXorTree,
            "undersizedxor" | "undersized" => GenKind::UndersizedXor,
            "muxcandidate" | "mux" => GenKind::MuxCandidate,
            "randomb2undermu" | "affine" => GenKind::RandomB2UnderMu,
            _ => return Err(Error::input(format!("unknown generator `{s}`"))),
        })
    }
}

#[derive(Clone, Debug)]
pub struct GenSpec {
    pub kind: GenKind,
    /// Inputs for XOR kinds, address bits for MUX, ambient dimension for B2.
    pub n: usize,
    pub seed: u64,
    /// Size bound: `σ` ceiling (exclusive) for undersized kinds, `μ` ceiling
    /// for B2 circuits. Defaults to the refuter's threshold.
    pub budget: Option<usize>,
    /// Sabotage edits.
    pub mutations: usize,
}

impl GenSpec {
    pub fn new(kind: GenKind, n: usize, seed: u64) -> Self {
        GenSpec {
            kind,
            n,
            seed,
            budget: None,
            mutations: 1,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct GenMeta {
    /// Index set of the intended parity (XOR kinds).
    pub indices: Vec<usize>,
    /// Intended polarity `c`.
    pub negated: bool,
    /// An input on which the circuit is known to be wrong.
    pub distinguishing: Option<Assignment>,
    pub note: String,
}

#[derive(Clone, Debug)]
pub struct Generated {
    pub circuit: Circuit,
    pub meta: GenMeta,
}

const MAX_ATTEMPTS: usize = 1000;
const SEARCH_SAMPLES: usize = 100_000;
/// Largest `n` for which sabotage is confirmed by a truth table.
pub const TABLE_CONFIRM_MAX: usize = 14;

/// Deterministic in `spec`.
pub fn generate(spec: &GenSpec) -> Result<Generated> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let g = match spec.kind {
        GenKind::XorTree => {
            if spec.n == 0 {
                return Err(Error::input("an XOR tree needs at least one input"));
            }
            let (circuit, negated) = xor_tree(spec.n, &mut rng);
            Generated {
                circuit,
                meta: GenMeta {
                    indices: (1..=spec.n).collect(),
                    negated,
                    distinguishing: None,
                    note: format!("widget tree over {} inputs", spec.n),
                },
            }
        }
        GenKind::SabotagedXorTree => sabotaged(spec, &mut rng)?,
        GenKind::UndersizedXor => undersized(spec, &mut rng)?,
        GenKind::MuxCandidate => mux_candidate(spec, &mut rng)?,
        GenKind::RandomB2UnderMu => random_b2(spec, &mut rng)?,
    };
    if let Err(errs) = g.circuit.validate() {
        return Err(Error::bug(
            format!("generator produced an invalid circuit: {}", errs[0]),
            &Default::default(),
        ));
    }
    Ok(g)
}

struct Tree {
    b: CircuitBuilder,
    nots: HashMap<Node, Node>,
}

impl Tree {
    fn lit(&mut self, base: Node, neg: bool) -> Node {
        if !neg {
            return base;
        }
        let b = &mut self.b;
        *self.nots.entry(base).or_insert_with(|| b.not(base))
    }

    fn widget(&mut self, w: &Widget, x: Node, y: Node) -> Node {
        let mut out = [Node::Const(false); 3];
        for (k, g) in w.gates.iter().enumerate() {
            let mut src = [Node::Const(false); 2];
            for (slot, &(r, neg)) in g.src.iter().enumerate() {
                let base = match r {
                    WRef::X => x,
                    WRef::Y => y,
                    WRef::G(i) => out[i as usize],
                };
                src[slot] = self.lit(base, neg);
            }
            out[k] = if g.or {
                self.b.or(src[0], src[1])
            } else {
                self.b.and(src[0], src[1])
            };
        }
        out[2]
    }
}

/// Random widget tree over all `n` inputs, with its polarity.
fn xor_tree(n: usize, rng: &mut ChaCha8Rng) -> (Circuit, bool) {
    let lib = widget_library().members();
    let mut t = Tree {
        b: CircuitBuilder::demorgan(n),
        nots: HashMap::new(),
    };
    let mut roots: Vec<Node> = (1..=n).map(Node::Input).collect();
    let mut negated = false;
    while roots.len() > 1 {
        let i = rng.gen_range(0..roots.len());
        let u = roots.swap_remove(i);
        let j = rng.gen_range(0..roots.len());
        let v = roots.swap_remove(j);
        let w = lib.choose(rng).expect("widget library is empty");
        negated ^= w.table() == TruthTable::XNOR;
        let (x, y) = if rng.gen() { (u, v) } else { (v, u) };
        let out = t.widget(w, x, y);
        roots.push(out);
    }
    (normalized(&t.b.build(roots[0])), negated)
}

fn parity_table(n: usize, negated: bool) -> FunctionTable {
    FunctionTable::from_fn(n, |x| x.iter().fold(negated, |a, &b| a ^ b))
}

/// One random edit to a binary gate: AND/OR flip or a rewired source.
fn mutate(c: &Circuit, rng: &mut ChaCha8Rng) -> Circuit {
    let binary: Vec<usize> = (0..c.gates().len()).filter(|&g| c.gate(g).is_binary()).collect();
    let Some(&g) = binary.choose(rng) else {
        return c.clone();
    };
    let mut gates = c.gates().to_vec();
    let gate = &gates[g];
    if rng.gen_bool(0.5) {
        let kind = if gate.kind() == GateKind::And { GateKind::Or } else { GateKind::And };
        gates[g] = gate.with_kind(kind);
    } else {
        let slot = rng.gen_range(0..2);
        let other = gate.sources()[1 - slot];
        let choices: Vec<Node> = (1..=c.num_inputs())
            .map(Node::Input)
            .chain((0..g).map(Node::Gate))
            .filter(|&n| n != other && n != gate.sources()[slot])
            .collect();
        if let Some(&to) = choices.choose(rng) {
            let mut k = 0;
            gates[g] = gate.map_sources(|s| {
                k += 1;
                if k - 1 == slot {
                    to
                } else {
                    s
                }
            });
        }
    }
    Circuit::from_parts(c.basis(), c.layout(), gates, c.output(), c.output_negated())
}

fn sabotaged(spec: &GenSpec, rng: &mut ChaCha8Rng) -> Result<Generated> {
    let n = spec.n;
    if n < 2 {
        return Err(Error::input("sabotage needs at least two inputs"));
    }
    let sigma = 3 * (n - 1);
    for attempt in 0..MAX_ATTEMPTS {
        let (tree, negated) = xor_tree(n, rng);
        let mut c = tree;
        for _ in 0..spec.mutations.max(1) {
            c = mutate(&c, rng);
        }
        let c = normalized(&c);
        if c.binary_gate_count() != sigma || c.read_inputs().len() != n {
            continue;
        }
        let distinguishing = if n <= TABLE_CONFIRM_MAX {
            let tt = truth_table_capped(&c, TABLE_CONFIRM_MAX)?;
            match tt.first_difference(&parity_table(n, negated)) {
                Some(row) => row_bits(row, n),
                None => continue,
            }
        } else {
            let matches = match detect_xor(&c)? {
                XorVerdict::Xor => !negated,
                XorVerdict::NotXor => negated,
                XorVerdict::Neither => false,
            };
            if matches {
                continue;
            }
            let found = (0..SEARCH_SAMPLES).find_map(|_| {
                let x: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
                let want = x.iter().fold(negated, |a, &b| a ^ b);
                (c.eval_unchecked(&x) != want).then_some(x)
            });
            match found {
                Some(x) => x,
                None => continue,
            }
        };
        return Ok(Generated {
            circuit: c,
            meta: GenMeta {
                indices: (1..=n).collect(),
                negated,
                distinguishing: Some(Assignment(distinguishing)),
                note: format!("{} edits, accepted after {} attempts", spec.mutations.max(1), attempt + 1),
            },
        });
    }
    Err(Error::Resource(format!(
        "no confirmed sabotage for n = {n} within {MAX_ATTEMPTS} attempts"
    )))
}

fn undersized(spec: &GenSpec, rng: &mut ChaCha8Rng) -> Result<Generated> {
    let n = spec.n;
    if n < 2 {
        return Err(Error::input("undersized XOR needs at least two inputs"));
    }
    let budget = spec.budget.unwrap_or(3 * (n - 1));
    if budget == 0 {
        return Err(Error::input("size budget must be positive"));
    }
    for _ in 0..MAX_ATTEMPTS {
        let (c, note) = if rng.gen_bool(0.5) {
            collapsed_tree(n, rng)
        } else {
            let gates = rng.gen_range(0..budget.max(1) + n);
            let r = RandomCircuit {
                basis: Basis::DeMorgan,
                inputs: n,
                gates,
                constants: false,
                not_gates: true,
            };
            (normalized(&random_circuit(&r, rng.gen())), format!("random, {gates} gates drawn"))
        };
        if c.binary_gate_count() < budget {
            return Ok(Generated {
                circuit: c,
                meta: GenMeta {
                    indices: (1..=n).collect(),
                    negated: rng.gen(),
                    distinguishing: None,
                    note,
                },
            });
        }
    }
    Err(Error::Resource(format!("no circuit under size {budget} found")))
}

/// A widget tree where some merges are a single AND/OR.
fn collapsed_tree(n: usize, rng: &mut ChaCha8Rng) -> (Circuit, String) {
    let lib = widget_library().members();
    let mut t = Tree {
        b: CircuitBuilder::demorgan(n),
        nots: HashMap::new(),
    };
    let mut roots: Vec<Node> = (1..=n).map(Node::Input).collect();
    let collapse = rng.gen_range(1..=n - 1);
    let mut merges = 0;
    let mut collapsed = 0;
    while roots.len() > 1 {
        let u = roots.swap_remove(rng.gen_range(0..roots.len()));
        let v = roots.swap_remove(rng.gen_range(0..roots.len()));
        merges += 1;
        let out = if collapsed == 0 && merges == collapse || rng.gen_bool(0.1) {
            collapsed += 1;
            let (nu, nv) = (rng.gen(), rng.gen());
            let (x, y) = (t.lit(u, nu), t.lit(v, nv));
            if rng.gen() {
                t.b.and(x, y)
            } else {
                t.b.or(x, y)
            }
        } else {
            let w = lib.choose(rng).expect("widget library is empty");
            t.widget(w, u, v)
        };
        roots.push(out);
    }
    (
        normalized(&t.b.build(roots[0])),
        format!("widget tree with {collapsed} collapsed merges"),
    )
}

fn mux_candidate(spec: &GenSpec, rng: &mut ChaCha8Rng) -> Result<Generated> {
    let n = spec.n;
    if n == 0 || n > 16 {
        return Err(Error::input("mux candidates need 1 to 16 address bits"));
    }
    let bound = spec.budget.unwrap_or(mux_size_bound(n));
    if bound == 0 {
        return Err(Error::input("size budget must be positive"));
    }
    let layout = InputLayout::mux(n);
    for _ in 0..MAX_ATTEMPTS {
        let (c, note) = if rng.gen_bool(0.7) {
            let mut c = mux_circuit(n);
            let mut cuts = 0;
            while c.binary_gate_count() >= bound {
                c = truncate(&c, rng);
                cuts += 1;
            }
            (c, format!("recursive multiplexer with {cuts} cuts"))
        } else {
            let r = RandomCircuit {
                basis: Basis::DeMorgan,
                inputs: layout.len(),
                gates: rng.gen_range(0..bound + 4),
                constants: false,
                not_gates: true,
            };
            let c = random_circuit(&r, rng.gen());
            let c = Circuit::from_parts(c.basis(), layout, c.gates().to_vec(), c.output(), false);
            (normalized(&c), "random".to_string())
        };
        if c.binary_gate_count() < bound {
            return Ok(Generated {
                circuit: c,
                meta: GenMeta {
                    note,
                    ..Default::default()
                },
            });
        }
    }
    Err(Error::Resource(format!("no circuit under size {bound} found")))
}

/// Replaces a random binary gate by a constant or one of its sources.
fn truncate(c: &Circuit, rng: &mut ChaCha8Rng) -> Circuit {
    let binary: Vec<usize> = (0..c.gates().len()).filter(|&g| c.gate(g).is_binary()).collect();
    let Some(&g) = binary.choose(rng) else {
        return c.clone();
    };
    let to = match rng.gen_range(0..3) {
        0 => Node::Const(rng.gen()),
        k => c.gate(g).sources()[k - 1],
    };
    let swap = |s: Node| if s == Node::Gate(g) { to } else { s };
    let gates: Vec<Gate> = c.gates().iter().map(|x| x.map_sources(swap)).collect();
    normalized(&Circuit::from_parts(
        c.basis(),
        c.layout(),
        gates,
        swap(c.output()),
        c.output_negated(),
    ))
}

fn random_b2(spec: &GenSpec, rng: &mut ChaCha8Rng) -> Result<Generated> {
    let n = spec.n;
    if n == 0 {
        return Err(Error::input("B2 circuits need at least one input"));
    }
    let budget = spec.budget.unwrap_or(4 * (n - n.div_ceil(4)));
    if budget == 0 {
        return Err(Error::input("measure budget must be positive"));
    }
    let tables: Vec<TruthTable> = (0..16u8)
        .map(TruthTable::from_bits)
        .filter(|t| t.class() != GateClass::Degenerate)
        .collect();
    for _ in 0..MAX_ATTEMPTS {
        let gates = rng.gen_range(0..budget.max(2));
        let mut b = CircuitBuilder::b2(n);
        for made in 0..gates {
            let total = n + made;
            let mut pick = || {
                let k = rng.gen_range(0..total);
                if k < n {
                    Node::Input(k + 1)
                } else {
                    Node::Gate(k - n)
                }
            };
            let (a, c) = (pick(), pick());
            let t = if rng.gen_bool(0.4) {
                *[TruthTable::XOR, TruthTable::XNOR].choose(rng).unwrap()
            } else {
                *tables.choose(rng).unwrap()
            };
            b.table(t, a, c);
        }
        let out = if gates > 0 {
            Node::Gate(gates - 1)
        } else {
            Node::Input(rng.gen_range(1..=n))
        };
        let c = normalized(&b.build_negated(out, rng.gen()));
        if c.measures().mu < budget {
            return Ok(Generated {
                circuit: c,
                meta: GenMeta {
                    note: format!("{gates} gates drawn, measure budget {budget}"),
                    ..Default::default()
                },
            });
        }
    }
    Err(Error::Resource(format!("no B2 circuit under measure {budget} found")))
}
