//! Circuit IR over the DeMorgan and B2 bases.
//!
//! A [`Circuit`] is a single-output gate list in topological order. Inputs are
//! 1-indexed (`x1..xn`, or `a1..an` followed by `x1..xN` for multiplexer
//! layouts); gates are 0-indexed by position. In the DeMorgan basis NOT gates
//! are explicit and free; in B2 negations live in the gate truth tables and a
//! single output-negation flag.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Basis {
    DeMorgan,
    B2,
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Basis::DeMorgan => f.write_str("demorgan"),
            Basis::B2 => f.write_str("b2"),
        }
    }
}

/// How the circuit's inputs are declared.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum InputLayout {
    Plain(usize),
    /// `addr` address bits followed by `data = 2^addr` data bits.
    Mux { addr: usize, data: usize },
}

impl InputLayout {
    pub fn mux(addr: usize) -> Self {
        InputLayout::Mux {
            addr,
            data: 1 << addr,
        }
    }

    pub fn len(&self) -> usize {
        match *self {
            InputLayout::Plain(n) => n,
            InputLayout::Mux { addr, data } => addr + data,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Display name of 1-based input `i`.
    pub fn name(&self, i: usize) -> String {
        match *self {
            InputLayout::Plain(_) => format!("x{i}"),
            InputLayout::Mux { addr, .. } if i <= addr => format!("a{i}"),
            InputLayout::Mux { addr, .. } => format!("x{}", i - addr),
        }
    }
}

/// A wire source: a constant, a 1-based input, or a 0-based gate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    Const(bool),
    Input(usize),
    Gate(usize),
}

impl Serialize for Node {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&match self {
            Node::Const(b) => u8::from(*b).to_string(),
            Node::Input(i) => format!("x{i}"),
            Node::Gate(g) => format!("g{}", g + 1),
        })
    }
}

/// Truth table of a two-input function, `f(0,0) f(0,1) f(1,0) f(1,1)`.
///
/// Bit `2*l + r` of the inner byte holds `f(l, r)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TruthTable(u8);

/// A one-input Boolean function.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Unary {
    Const(bool),
    Identity,
    Negation,
}

impl Unary {
    fn from_values(at0: bool, at1: bool) -> Self {
        match (at0, at1) {
            (false, false) => Unary::Const(false),
            (true, true) => Unary::Const(true),
            (false, true) => Unary::Identity,
            (true, false) => Unary::Negation,
        }
    }

    pub fn apply(self, x: bool) -> bool {
        match self {
            Unary::Const(b) => b,
            Unary::Identity => x,
            Unary::Negation => !x,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum GateClass {
    Degenerate,
    AndType,
    XorType,
}

impl TruthTable {
    pub const AND: TruthTable = TruthTable(0b1000);
    pub const OR: TruthTable = TruthTable(0b1110);
    pub const XOR: TruthTable = TruthTable(0b0110);
    pub const XNOR: TruthTable = TruthTable(0b1001);

    pub fn from_bits(bits: u8) -> Self {
        TruthTable(bits & 0xf)
    }

    pub fn from_fn(f: impl Fn(bool, bool) -> bool) -> Self {
        let mut bits = 0u8;
        for l in [false, true] {
            for r in [false, true] {
                if f(l, r) {
                    bits |= 1 << ((l as u8) << 1 | r as u8);
                }
            }
        }
        TruthTable(bits)
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn eval(self, l: bool, r: bool) -> bool {
        self.0 >> ((l as u8) << 1 | r as u8) & 1 == 1
    }

    /// Bit-parallel evaluation over 64 assignments.
    pub fn eval_words(self, l: u64, r: u64) -> u64 {
        let mut out = 0u64;
        if self.eval(false, false) {
            out |= !l & !r;
        }
        if self.eval(false, true) {
            out |= !l & r;
        }
        if self.eval(true, false) {
            out |= l & !r;
        }
        if self.eval(true, true) {
            out |= l & r;
        }
        out
    }

    pub fn negate_left(self) -> Self {
        Self::from_fn(|l, r| self.eval(!l, r))
    }

    pub fn negate_right(self) -> Self {
        Self::from_fn(|l, r| self.eval(l, !r))
    }

    pub fn negate_output(self) -> Self {
        TruthTable(!self.0 & 0xf)
    }

    pub fn swap_inputs(self) -> Self {
        Self::from_fn(|l, r| self.eval(r, l))
    }

    pub fn depends_on_left(self) -> bool {
        self.eval(false, false) != self.eval(true, false)
            || self.eval(false, true) != self.eval(true, true)
    }

    pub fn depends_on_right(self) -> bool {
        self.eval(false, false) != self.eval(false, true)
            || self.eval(true, false) != self.eval(true, true)
    }

    pub fn restrict_left(self, l: bool) -> Unary {
        Unary::from_values(self.eval(l, false), self.eval(l, true))
    }

    pub fn restrict_right(self, r: bool) -> Unary {
        Unary::from_values(self.eval(false, r), self.eval(true, r))
    }

    /// The function `y -> f(y, y)`.
    pub fn diagonal(self) -> Unary {
        Unary::from_values(self.eval(false, false), self.eval(true, true))
    }

    pub fn class(self) -> GateClass {
        if !self.depends_on_left() || !self.depends_on_right() {
            GateClass::Degenerate
        } else if self == Self::XOR || self == Self::XNOR {
            GateClass::XorType
        } else {
            GateClass::AndType
        }
    }
}

impl fmt::Display for TruthTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in 0..4 {
            f.write_str(if self.0 >> k & 1 == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for TruthTable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.len() != 4 {
            return Err(Error::input(format!("truth table `{s}` must have 4 bits")));
        }
        let mut bits = 0u8;
        for (k, ch) in s.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => bits |= 1 << k,
                _ => return Err(Error::input(format!("truth table `{s}` is not binary"))),
            }
        }
        Ok(TruthTable(bits))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateKind {
    Not,
    And,
    Or,
    Table(TruthTable),
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::Not => 1,
            _ => 2,
        }
    }

    pub fn is_binary(self) -> bool {
        self.arity() == 2
    }

    /// Table of a binary kind; `None` for NOT.
    pub fn table(self) -> Option<TruthTable> {
        match self {
            GateKind::Not => None,
            GateKind::And => Some(TruthTable::AND),
            GateKind::Or => Some(TruthTable::OR),
            GateKind::Table(t) => Some(t),
        }
    }

    pub fn class(self) -> Option<GateClass> {
        self.table().map(TruthTable::class)
    }

    pub fn is_xor_type(self) -> bool {
        self.class() == Some(GateClass::XorType)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Gate {
    kind: GateKind,
    src: [Node; 2],
}

impl Gate {
    pub fn not(a: Node) -> Self {
        Gate {
            kind: GateKind::Not,
            src: [a, a],
        }
    }

    pub fn binary(kind: GateKind, a: Node, b: Node) -> Self {
        debug_assert!(kind.is_binary());
        Gate { kind, src: [a, b] }
    }

    pub fn and(a: Node, b: Node) -> Self {
        Self::binary(GateKind::And, a, b)
    }

    pub fn or(a: Node, b: Node) -> Self {
        Self::binary(GateKind::Or, a, b)
    }

    pub fn table(t: TruthTable, a: Node, b: Node) -> Self {
        Self::binary(GateKind::Table(t), a, b)
    }

    pub fn kind(&self) -> GateKind {
        self.kind
    }

    pub fn is_binary(&self) -> bool {
        self.kind.is_binary()
    }

    pub fn sources(&self) -> &[Node] {
        &self.src[..self.kind.arity()]
    }

    pub(crate) fn map_sources(&self, mut f: impl FnMut(Node) -> Node) -> Self {
        let a = f(self.src[0]);
        let b = if self.is_binary() { f(self.src[1]) } else { a };
        Gate {
            kind: self.kind,
            src: [a, b],
        }
    }

    pub(crate) fn with_kind(&self, kind: GateKind) -> Self {
        debug_assert_eq!(kind.arity(), self.kind.arity());
        Gate {
            kind,
            src: self.src,
        }
    }

    fn eval(&self, a: bool, b: bool) -> bool {
        match self.kind {
            GateKind::Not => !a,
            GateKind::And => a && b,
            GateKind::Or => a || b,
            GateKind::Table(t) => t.eval(a, b),
        }
    }

    fn eval_words(&self, a: u64, b: u64) -> u64 {
        match self.kind {
            GateKind::Not => !a,
            GateKind::And => a & b,
            GateKind::Or => a | b,
            GateKind::Table(t) => t.eval_words(a, b),
        }
    }
}

/// Size measures: binary gates, read inputs, and their sum.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct Measures {
    pub sigma: usize,
    pub eta: usize,
    pub mu: usize,
}

/// Per-node fanout where binary slots and the output tap count through NOT
/// chains.
#[derive(Clone, Debug)]
pub struct Fanouts {
    inputs: Vec<usize>,
    gates: Vec<usize>,
}

impl Fanouts {
    pub fn get(&self, node: Node) -> usize {
        match node {
            Node::Const(_) => 0,
            Node::Input(i) => self.inputs[i - 1],
            Node::Gate(g) => self.gates[g],
        }
    }

    pub fn input(&self, i: usize) -> usize {
        self.inputs[i - 1]
    }

    pub fn gate(&self, g: usize) -> usize {
        self.gates[g]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ValidationError {
    /// A gate reads a gate at or after its own position.
    Order { gate: usize, source: usize },
    UnknownInput { gate: Option<usize>, input: usize },
    /// `gate` is `None` for the output designation.
    UnknownGate { gate: Option<usize>, source: usize },
    Basis { gate: usize, kind: GateKind, basis: Basis },
    OutputNegationInDeMorgan,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let at = |g: &Option<usize>| match g {
            Some(g) => format!("gate g{}", g + 1),
            None => "output".to_string(),
        };
        match self {
            ValidationError::Order { gate, source } => write!(
                f,
                "gate g{} reads g{} which does not precede it",
                gate + 1,
                source + 1
            ),
            ValidationError::UnknownInput { gate, input } => {
                write!(f, "{} reads undeclared input {input}", at(gate))
            }
            ValidationError::UnknownGate { gate, source } => {
                write!(f, "{} reads undeclared gate g{}", at(gate), source + 1)
            }
            ValidationError::Basis { gate, kind, basis } => {
                write!(f, "gate g{} of kind {kind:?} is not allowed in basis {basis}", gate + 1)
            }
            ValidationError::OutputNegationInDeMorgan => {
                f.write_str("output negation flag is only allowed in b2 circuits")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Circuit {
    basis: Basis,
    layout: InputLayout,
    gates: Vec<Gate>,
    output: Node,
    output_negated: bool,
}

impl Circuit {
    /// Assembles a circuit without checking it; see [`Circuit::validate`].
    pub fn from_parts(
        basis: Basis,
        layout: InputLayout,
        gates: Vec<Gate>,
        output: Node,
        output_negated: bool,
    ) -> Self {
        Circuit {
            basis,
            layout,
            gates,
            output,
            output_negated,
        }
    }

    pub fn constant(basis: Basis, layout: InputLayout, value: bool) -> Self {
        Self::from_parts(basis, layout, Vec::new(), Node::Const(value), false)
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn layout(&self) -> InputLayout {
        self.layout
    }

    pub fn num_inputs(&self) -> usize {
        self.layout.len()
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn gate(&self, id: usize) -> &Gate {
        &self.gates[id]
    }

    pub fn output(&self) -> Node {
        self.output
    }

    pub fn output_negated(&self) -> bool {
        self.output_negated
    }

    /// The output as a constant, if the designation is syntactically constant.
    pub fn constant_output(&self) -> Option<bool> {
        match self.output {
            Node::Const(b) => Some(b ^ self.output_negated),
            _ => None,
        }
    }

    pub fn binary_gate_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_binary()).count()
    }

    pub fn not_gate_count(&self) -> usize {
        self.gates.len() - self.binary_gate_count()
    }

    fn check_arity(&self, x: &[bool]) -> Result<()> {
        if x.len() != self.num_inputs() {
            return Err(Error::input(format!(
                "assignment has {} bits, circuit has {} inputs",
                x.len(),
                self.num_inputs()
            )));
        }
        Ok(())
    }

    pub fn evaluate(&self, x: &[bool]) -> Result<bool> {
        self.check_arity(x)?;
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[bool]) -> bool {
        let mut values = Vec::with_capacity(self.gates.len());
        let value = |values: &Vec<bool>, n: Node| match n {
            Node::Const(b) => b,
            Node::Input(i) => x[i - 1],
            Node::Gate(g) => values[g],
        };
        for gate in &self.gates {
            let a = value(&values, gate.src[0]);
            let b = value(&values, gate.src[1]);
            let v = gate.eval(a, b);
            values.push(v);
        }
        value(&values, self.output) ^ self.output_negated
    }

    /// Evaluates 64 assignments at once; bit `k` of `words[i-1]` is input `i`
    /// of assignment `k`.
    pub fn evaluate_words(&self, words: &[u64]) -> Result<u64> {
        if words.len() != self.num_inputs() {
            return Err(Error::input(format!(
                "{} input words for {} inputs",
                words.len(),
                self.num_inputs()
            )));
        }
        let mut values: Vec<u64> = Vec::with_capacity(self.gates.len());
        let value = |values: &Vec<u64>, n: Node| match n {
            Node::Const(b) => {
                if b {
                    u64::MAX
                } else {
                    0
                }
            }
            Node::Input(i) => words[i - 1],
            Node::Gate(g) => values[g],
        };
        for gate in &self.gates {
            let a = value(&values, gate.src[0]);
            let b = value(&values, gate.src[1]);
            let v = gate.eval_words(a, b);
            values.push(v);
        }
        let out = value(&values, self.output);
        Ok(if self.output_negated { !out } else { out })
    }

    /// Strips NOT gates: returns the first non-NOT node and the parity of the
    /// NOTs passed through.
    pub fn literal(&self, mut node: Node) -> (Node, bool) {
        let mut neg = false;
        while let Node::Gate(g) = node {
            let gate = &self.gates[g];
            if gate.kind != GateKind::Not {
                break;
            }
            neg = !neg;
            node = gate.src[0];
        }
        (node, neg)
    }

    pub fn fanouts(&self) -> Fanouts {
        let mut inputs = vec![0; self.num_inputs()];
        let mut gates = vec![0; self.gates.len()];
        let bump = |mut node: Node, inputs: &mut Vec<usize>, gates: &mut Vec<usize>| loop {
            match node {
                Node::Const(_) => return,
                Node::Input(i) => {
                    if let Some(slot) = inputs.get_mut(i.wrapping_sub(1)) {
                        *slot += 1;
                    }
                    return;
                }
                Node::Gate(g) => {
                    let Some(slot) = gates.get_mut(g) else { return };
                    *slot += 1;
                    let gate = &self.gates[g];
                    if gate.kind != GateKind::Not {
                        return;
                    }
                    node = gate.src[0];
                }
            }
        };
        for gate in self.gates.iter().filter(|g| g.is_binary()) {
            for &s in gate.sources() {
                bump(s, &mut inputs, &mut gates);
            }
        }
        bump(self.output, &mut inputs, &mut gates);
        Fanouts { inputs, gates }
    }

    /// Number of binary-gate slots reading `node` directly or through NOTs,
    /// plus one if `node` (possibly under NOTs) is the output.
    pub fn fanout(&self, node: Node) -> Result<usize> {
        self.check_node(node)?;
        Ok(self.fanouts().get(node))
    }

    /// Readers of `node` counted without looking through NOTs: every gate slot
    /// (binary or NOT) that names it, plus one if it is the output.
    pub fn direct_fanout(&self, node: Node) -> Result<usize> {
        self.check_node(node)?;
        let slots = self
            .gates
            .iter()
            .flat_map(|g| g.sources())
            .filter(|&&s| s == node)
            .count();
        Ok(slots + usize::from(self.output == node))
    }

    fn check_node(&self, node: Node) -> Result<()> {
        match node {
            Node::Input(i) if i == 0 || i > self.num_inputs() => {
                Err(Error::input(format!("unknown input {i}")))
            }
            Node::Gate(g) if g >= self.gates.len() => {
                Err(Error::input(format!("unknown gate g{}", g + 1)))
            }
            _ => Ok(()),
        }
    }

    /// True when input `i` has fanout at least one.
    pub fn reads_input(&self, i: usize) -> bool {
        i >= 1 && i <= self.num_inputs() && self.fanouts().input(i) > 0
    }

    /// 1-based inputs with fanout at least one, ascending.
    pub fn read_inputs(&self) -> Vec<usize> {
        let f = self.fanouts();
        (1..=self.num_inputs()).filter(|&i| f.input(i) > 0).collect()
    }

    pub fn measures(&self) -> Measures {
        let sigma = self.binary_gate_count();
        let eta = self.fanouts().inputs.iter().filter(|&&c| c > 0).count();
        Measures {
            sigma,
            eta,
            mu: sigma + eta,
        }
    }

    /// Binary-gate depth of every gate (NOTs add nothing).
    pub fn depths(&self) -> Vec<usize> {
        let mut depth = Vec::with_capacity(self.gates.len());
        for gate in &self.gates {
            let d = gate
                .sources()
                .iter()
                .map(|s| match *s {
                    Node::Gate(g) => depth[g],
                    _ => 0,
                })
                .max()
                .unwrap_or(0);
            depth.push(d + usize::from(gate.is_binary()));
        }
        depth
    }

    /// A topologically minimal gate satisfying `pred`: no gate strictly inside
    /// its input cone satisfies `pred`. Among such gates the one of least
    /// depth wins, then the lowest id.
    pub fn minimal_gate(&self, pred: impl Fn(usize, &Gate) -> bool) -> Option<usize> {
        let n = self.gates.len();
        let mut sat = vec![false; n];
        let mut below = vec![false; n];
        for (id, gate) in self.gates.iter().enumerate() {
            sat[id] = pred(id, gate);
            below[id] = gate.sources().iter().any(|s| match *s {
                Node::Gate(g) => sat[g] || below[g],
                _ => false,
            });
        }
        let depth = self.depths();
        (0..n)
            .filter(|&g| sat[g] && !below[g])
            .min_by_key(|&g| (depth[g], g))
    }

    /// Gates in the input cone of `root`, including `root`, ascending.
    pub fn cone(&self, root: usize) -> Vec<usize> {
        let mut mark = vec![false; self.gates.len()];
        mark[root] = true;
        for g in (0..=root).rev() {
            if !mark[g] {
                continue;
            }
            for s in self.gates[g].sources() {
                if let Node::Gate(h) = *s {
                    mark[h] = true;
                }
            }
        }
        (0..=root).filter(|&g| mark[g]).collect()
    }

    /// The subcircuit rooted at `root`, over the same input layout.
    pub fn induced_subcircuit(&self, root: usize) -> Circuit {
        let cone = self.cone(root);
        let mut remap = vec![usize::MAX; self.gates.len()];
        for (new, &old) in cone.iter().enumerate() {
            remap[old] = new;
        }
        let gates = cone
            .iter()
            .map(|&g| {
                self.gates[g].map_sources(|s| match s {
                    Node::Gate(h) => Node::Gate(remap[h]),
                    other => other,
                })
            })
            .collect();
        Circuit::from_parts(self.basis, self.layout, gates, Node::Gate(remap[root]), false)
    }

    /// Checks ordering, input ranges, and basis consistency, reporting every
    /// violation.
    pub fn validate(&self) -> std::result::Result<(), Vec<ValidationError>> {
        let mut errors = Vec::new();
        let n = self.num_inputs();
        let check = |gate: Option<usize>, s: Node, errors: &mut Vec<ValidationError>| match s {
            Node::Const(_) => {}
            Node::Input(i) => {
                if i == 0 || i > n {
                    errors.push(ValidationError::UnknownInput { gate, input: i });
                }
            }
            Node::Gate(h) => match gate {
                Some(g) if h >= g => {
                    if h >= self.gates.len() {
                        errors.push(ValidationError::UnknownGate { gate, source: h });
                    } else {
                        errors.push(ValidationError::Order { gate: g, source: h });
                    }
                }
                None if h >= self.gates.len() => {
                    errors.push(ValidationError::UnknownGate { gate, source: h });
                }
                _ => {}
            },
        };
        for (id, gate) in self.gates.iter().enumerate() {
            for &s in gate.sources() {
                check(Some(id), s, &mut errors);
            }
            let allowed = !matches!(
                (self.basis, gate.kind),
                (Basis::DeMorgan, GateKind::Table(_)) | (Basis::B2, GateKind::Not | GateKind::And | GateKind::Or)
            );
            if !allowed {
                errors.push(ValidationError::Basis {
                    gate: id,
                    kind: gate.kind,
                    basis: self.basis,
                });
            }
        }
        check(None, self.output, &mut errors);
        if self.output_negated && self.basis == Basis::DeMorgan {
            errors.push(ValidationError::OutputNegationInDeMorgan);
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(errors)
        }
    }
}

/// Incremental construction of circuits in topological order.
#[derive(Clone, Debug)]
pub struct CircuitBuilder {
    basis: Basis,
    layout: InputLayout,
    gates: Vec<Gate>,
}

impl CircuitBuilder {
    pub fn new(basis: Basis, layout: InputLayout) -> Self {
        CircuitBuilder {
            basis,
            layout,
            gates: Vec::new(),
        }
    }

    pub fn demorgan(n: usize) -> Self {
        Self::new(Basis::DeMorgan, InputLayout::Plain(n))
    }

    pub fn b2(n: usize) -> Self {
        Self::new(Basis::B2, InputLayout::Plain(n))
    }

    /// Input `x_i`, 1-based over the whole input list.
    pub fn input(&self, i: usize) -> Node {
        assert!(i >= 1 && i <= self.layout.len(), "input {i} out of range");
        Node::Input(i)
    }

    /// Address bit `a_k` of a multiplexer layout.
    pub fn addr(&self, k: usize) -> Node {
        match self.layout {
            InputLayout::Mux { addr, .. } if k >= 1 && k <= addr => Node::Input(k),
            _ => panic!("address bit a{k} not in layout"),
        }
    }

    /// Data bit `x_j` of a multiplexer layout.
    pub fn data(&self, j: usize) -> Node {
        match self.layout {
            InputLayout::Mux { addr, data } if j >= 1 && j <= data => Node::Input(addr + j),
            _ => panic!("data bit x{j} not in layout"),
        }
    }

    pub fn push(&mut self, gate: Gate) -> Node {
        self.gates.push(gate);
        Node::Gate(self.gates.len() - 1)
    }

    pub fn not(&mut self, a: Node) -> Node {
        self.push(Gate::not(a))
    }

    pub fn and(&mut self, a: Node, b: Node) -> Node {
        self.push(Gate::and(a, b))
    }

    pub fn or(&mut self, a: Node, b: Node) -> Node {
        self.push(Gate::or(a, b))
    }

    pub fn table(&mut self, t: TruthTable, a: Node, b: Node) -> Node {
        self.push(Gate::table(t, a, b))
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn build(self, output: Node) -> Circuit {
        Circuit::from_parts(self.basis, self.layout, self.gates, output, false)
    }

    pub fn build_negated(self, output: Node, negated: bool) -> Circuit {
        Circuit::from_parts(self.basis, self.layout, self.gates, output, negated)
    }
}

/// An input assignment, bit `i-1` holding input `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Assignment(pub Vec<bool>);

impl Assignment {
    pub fn zeros(n: usize) -> Self {
        Assignment(vec![false; n])
    }

    /// Joins address and data halves of a multiplexer input.
    pub fn from_mux(addr: &[bool], data: &[bool]) -> Self {
        Assignment(addr.iter().chain(data).copied().collect())
    }

    /// Splits into `(address bits, data bits)` for `addr_bits` address inputs.
    pub fn split_mux(&self, addr_bits: usize) -> (&[bool], &[bool]) {
        self.0.split_at(addr_bits.min(self.0.len()))
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }
}

impl std::ops::Deref for Assignment {
    type Target = [bool];

    fn deref(&self) -> &[bool] {
        &self.0
    }
}

impl From<Vec<bool>> for Assignment {
    fn from(v: Vec<bool>) -> Self {
        Assignment(v)
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&bits_to_string(&self.0))
    }
}

impl FromStr for Assignment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_bits(s).map(Assignment)
    }
}

pub fn bits_to_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

pub fn parse_bits(s: &str) -> Result<Vec<bool>> {
    s.trim()
        .chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(Error::input(format!("`{s}` is not a bit string"))),
        })
        .collect()
}
