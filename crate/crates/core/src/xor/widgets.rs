//! The library of 3-gate DeMorgan (¬)XOR₂ widgets and widget-tree
//! partitioning.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::Serialize;

use crate::circuit::{Basis, Circuit, CircuitBuilder, GateKind, Node, TruthTable};
use crate::error::{Error, Result};

/// A widget wire: one of the two external inputs or an earlier widget gate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WRef {
    X,
    Y,
    G(u8),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WGate {
    pub or: bool,
    /// Sources with their negation flags, kept sorted.
    pub src: [(WRef, bool); 2],
}

/// Three binary gates in topological order; the last one is the top.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Widget {
    pub gates: [WGate; 3],
}

impl Widget {
    fn eval(&self, x: bool, y: bool) -> bool {
        let mut v = [false; 3];
        for (k, g) in self.gates.iter().enumerate() {
            let lit = |(r, neg): (WRef, bool)| {
                neg ^ match r {
                    WRef::X => x,
                    WRef::Y => y,
                    WRef::G(i) => v[i as usize],
                }
            };
            let (a, b) = (lit(g.src[0]), lit(g.src[1]));
            v[k] = if g.or { a || b } else { a && b };
        }
        v[2]
    }

    pub fn table(&self) -> TruthTable {
        TruthTable::from_fn(|x, y| self.eval(x, y))
    }

    /// The widget as a two-input DeMorgan circuit.
    pub fn to_circuit(&self) -> Circuit {
        let mut b = CircuitBuilder::demorgan(2);
        let mut nodes: Vec<Node> = Vec::new();
        let mut nots: HashMap<Node, Node> = HashMap::new();
        for g in &self.gates {
            let mut srcs = [Node::Const(false); 2];
            for (slot, &(r, neg)) in g.src.iter().enumerate() {
                let base = match r {
                    WRef::X => Node::Input(1),
                    WRef::Y => Node::Input(2),
                    WRef::G(i) => nodes[i as usize],
                };
                srcs[slot] = if neg {
                    *nots.entry(base).or_insert_with(|| b.not(base))
                } else {
                    base
                };
            }
            let out = if g.or {
                b.or(srcs[0], srcs[1])
            } else {
                b.and(srcs[0], srcs[1])
            };
            nodes.push(out);
        }
        b.build(nodes[2])
    }

    /// The least relabeling over valid gate orders and the input swap.
    pub fn canonical(&self) -> Widget {
        const PERMS: [[u8; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let mut best: Option<Widget> = None;
        for perm in PERMS {
            for swap in [false, true] {
                let map = |r: WRef| match r {
                    WRef::X if swap => WRef::Y,
                    WRef::Y if swap => WRef::X,
                    WRef::G(i) => WRef::G(perm[i as usize]),
                    r => r,
                };
                let mut gates = [self.gates[0]; 3];
                let mut valid = true;
                for (old, g) in self.gates.iter().enumerate() {
                    let pos = perm[old];
                    let mut src = [(map(g.src[0].0), g.src[0].1), (map(g.src[1].0), g.src[1].1)];
                    for &(r, _) in &src {
                        if let WRef::G(i) = r {
                            valid &= i < pos;
                        }
                    }
                    src.sort();
                    gates[pos as usize] = WGate { or: g.or, src };
                }
                if valid {
                    let w = Widget { gates };
                    if best.is_none_or(|b| w < b) {
                        best = Some(w);
                    }
                }
            }
        }
        best.expect("identity order is always valid")
    }
}

impl fmt::Display for Widget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, g) in self.gates.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            f.write_str(if g.or { "OR(" } else { "AND(" })?;
            for (slot, &(r, neg)) in g.src.iter().enumerate() {
                if slot > 0 {
                    f.write_str(",")?;
                }
                if neg {
                    f.write_str("!")?;
                }
                match r {
                    WRef::X => f.write_str("x")?,
                    WRef::Y => f.write_str("y")?,
                    WRef::G(i) => write!(f, "g{}", i + 1)?,
                }
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl FromStr for Widget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::input(format!("malformed widget `{s}`"));
        let parts: Vec<&str> = s.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let mut gates = Vec::with_capacity(3);
        for part in parts {
            let (op, rest) = part.split_once('(').ok_or_else(bad)?;
            let or = match op {
                "AND" => false,
                "OR" => true,
                _ => return Err(bad()),
            };
            let args = rest.strip_suffix(')').ok_or_else(bad)?;
            let mut src = Vec::with_capacity(2);
            for arg in args.split(',') {
                let (neg, name) = match arg.strip_prefix('!') {
                    Some(n) => (true, n),
                    None => (false, arg),
                };
                let r = match name {
                    "x" => WRef::X,
                    "y" => WRef::Y,
                    g => {
                        let k: u8 = g.strip_prefix('g').and_then(|k| k.parse().ok()).ok_or_else(bad)?;
                        if k == 0 || k as usize > gates.len() {
                            return Err(bad());
                        }
                        WRef::G(k - 1)
                    }
                };
                src.push((r, neg));
            }
            let src: [(WRef, bool); 2] = src.try_into().map_err(|_| bad())?;
            gates.push(WGate { or, src });
        }
        Ok(Widget {
            gates: gates.try_into().map_err(|_| bad())?,
        })
    }
}

/// Exhaustive enumeration of normalized 3-gate DeMorgan circuits over two
/// inputs computing XOR₂ or its negation, one representative per
/// isomorphism class, sorted.
pub fn enumerate_widgets() -> Vec<Widget> {
    fn gate_options(k: u8) -> Vec<WGate> {
        let mut refs = vec![WRef::X, WRef::Y];
        refs.extend((0..k).map(WRef::G));
        let mut out = Vec::new();
        for i in 0..refs.len() {
            for j in i + 1..refs.len() {
                for na in [false, true] {
                    for nb in [false, true] {
                        for or in [false, true] {
                            out.push(WGate {
                                or,
                                src: [(refs[i], na), (refs[j], nb)],
                            });
                        }
                    }
                }
            }
        }
        out
    }
    let mut found: HashSet<Widget> = HashSet::new();
    for &g0 in &gate_options(0) {
        for &g1 in &gate_options(1) {
            for &g2 in &gate_options(2) {
                let w = Widget { gates: [g0, g1, g2] };
                let reads = |r: WRef| w.gates.iter().any(|g| g.src.iter().any(|s| s.0 == r));
                if !reads(WRef::G(0)) || !reads(WRef::G(1)) || !reads(WRef::X) || !reads(WRef::Y) {
                    continue;
                }
                let t = w.table();
                if t != TruthTable::XOR && t != TruthTable::XNOR {
                    continue;
                }
                let c = w.to_circuit();
                if crate::rewrite::normalized(&c).binary_gate_count() != 3 {
                    continue;
                }
                found.insert(w.canonical());
            }
        }
    }
    let mut v: Vec<Widget> = found.into_iter().collect();
    v.sort();
    v
}

const LIBRARY_DATA: &str = include_str!("widgets.txt");

/// The embedded widget list, keyed by canonical form.
#[derive(Debug)]
pub struct WidgetLibrary {
    members: Vec<Widget>,
    index: HashMap<Widget, usize>,
}

impl WidgetLibrary {
    fn load() -> Self {
        let mut members = Vec::new();
        for line in LIBRARY_DATA.lines().map(str::trim) {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let w: Widget = line.parse().expect("embedded widget parses");
            let t = w.table();
            assert!(t == TruthTable::XOR || t == TruthTable::XNOR, "widget `{w}` is not (¬)XOR₂");
            assert_eq!(w.to_circuit().binary_gate_count(), 3);
            assert_eq!(w.canonical(), w, "embedded widget `{w}` is not canonical");
            members.push(w);
        }
        let index = members.iter().enumerate().map(|(i, w)| (*w, i)).collect();
        WidgetLibrary { members, index }
    }

    pub fn members(&self) -> &[Widget] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Library index of a widget (in any labeling).
    pub fn lookup(&self, w: &Widget) -> Option<usize> {
        self.index.get(&w.canonical()).copied()
    }
}

pub fn widget_library() -> &'static WidgetLibrary {
    static LIB: OnceLock<WidgetLibrary> = OnceLock::new();
    LIB.get_or_init(WidgetLibrary::load)
}

/// One contracted block of a widget tree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WidgetBlock {
    /// Gate ids of the block, ascending; the last is the top.
    pub gates: [usize; 3],
    /// The two external nodes, below any NOTs.
    pub inputs: [Node; 2],
    pub library_index: usize,
    /// True when the block computes ¬XOR₂ of its literal inputs.
    pub negated: bool,
}

/// Blocks in contraction order: children before parents.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WidgetPartition {
    pub blocks: Vec<WidgetBlock>,
}

/// Greedily partitions a normalized DeMorgan circuit into a tree of library
/// widgets whose leaves are the read variables.
pub fn partition_into_widgets(circuit: &Circuit) -> Option<WidgetPartition> {
    if circuit.basis() != Basis::DeMorgan {
        return None;
    }
    let gates = circuit.gates();
    let m = gates.len();
    // Binary readers of each node's base, through NOT chains.
    let mut readers: HashMap<Node, Vec<usize>> = HashMap::new();
    for (g, gate) in gates.iter().enumerate() {
        if !gate.is_binary() {
            continue;
        }
        for &s in gate.sources() {
            readers.entry(circuit.literal(s).0).or_default().push(g);
        }
    }
    let out_base = circuit.literal(circuit.output()).0;
    let vars = circuit.read_inputs();
    let mut reduced: HashSet<Node> = vars.iter().map(|&i| Node::Input(i)).collect();
    let mut assigned = vec![false; m];
    let binary: Vec<usize> = (0..m).filter(|&g| gates[g].is_binary()).collect();
    let lib = widget_library();
    let mut blocks = Vec::new();

    loop {
        let seed = binary.iter().copied().find(|&g| {
            if assigned[g] {
                return false;
            }
            let s = gates[g].sources();
            let (u, v) = (circuit.literal(s[0]).0, circuit.literal(s[1]).0);
            u != v && reduced.contains(&u) && reduced.contains(&v)
        });
        let Some(seed) = seed else { break };
        let s = gates[seed].sources();
        let (u, v) = (circuit.literal(s[0]).0, circuit.literal(s[1]).0);

        let mut block = vec![seed];
        let mut grew = true;
        while grew && block.len() <= 3 {
            grew = false;
            for &h in &binary {
                if assigned[h] || block.contains(&h) {
                    continue;
                }
                let inside = gates[h].sources().iter().all(|&src| {
                    let b = circuit.literal(src).0;
                    b == u || b == v || matches!(b, Node::Gate(k) if block.contains(&k))
                });
                if inside {
                    block.push(h);
                    grew = true;
                }
            }
        }
        if block.len() != 3 {
            return None;
        }
        block.sort_unstable();
        let top = block[2];
        for &g in &block[..2] {
            let rs = readers.get(&Node::Gate(g))?;
            if rs.iter().any(|r| !block.contains(r)) || out_base == Node::Gate(g) {
                return None;
            }
        }
        if readers
            .get(&Node::Gate(top))
            .is_some_and(|rs| rs.iter().any(|r| block.contains(r)))
        {
            return None;
        }
        for ext in [u, v] {
            let rs = readers.get(&ext)?;
            if rs.iter().any(|r| !block.contains(r)) || out_base == ext {
                return None;
            }
        }

        let wref = |n: Node| -> WRef {
            if n == u {
                WRef::X
            } else if n == v {
                WRef::Y
            } else {
                let Node::Gate(k) = n else { unreachable!() };
                WRef::G(block.iter().position(|&b| b == k).unwrap() as u8)
            }
        };
        let mut wg = [WGate {
            or: false,
            src: [(WRef::X, false); 2],
        }; 3];
        for (k, &g) in block.iter().enumerate() {
            let gate = &gates[g];
            let mut src = [(WRef::X, false); 2];
            for (slot, &s) in gate.sources().iter().enumerate() {
                let (b, neg) = circuit.literal(s);
                src[slot] = (wref(b), neg);
            }
            src.sort();
            wg[k] = WGate {
                or: gate.kind() == GateKind::Or,
                src,
            };
        }
        let widget = Widget { gates: wg };
        let library_index = lib.lookup(&widget)?;

        for &g in &block {
            assigned[g] = true;
        }
        reduced.remove(&u);
        reduced.remove(&v);
        reduced.insert(Node::Gate(top));
        blocks.push(WidgetBlock {
            gates: [block[0], block[1], block[2]],
            inputs: [u, v],
            library_index,
            negated: widget.table() == TruthTable::XNOR,
        });
    }

    let complete = binary.iter().all(|&g| assigned[g])
        && reduced.len() == 1
        && reduced.contains(&out_base)
        && blocks.len() + 1 == vars.len();
    complete.then_some(WidgetPartition { blocks })
}

/// Which parity, if any, a circuit of exactly optimal size computes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum XorVerdict {
    Xor,
    NotXor,
    Neither,
}

/// Decides whether a DeMorgan circuit with `σ = 3(n−1)` for its `n` read
/// variables computes XOR of them, its negation, or neither.
pub fn detect_xor(circuit: &Circuit) -> Result<XorVerdict> {
    if circuit.basis() != Basis::DeMorgan {
        return Err(Error::input("xor detection expects a DeMorgan circuit"));
    }
    let c = crate::rewrite::normalized(circuit);
    let n = c.read_inputs().len();
    let sigma = c.binary_gate_count();
    if n == 0 || sigma != 3 * (n - 1) {
        return Err(Error::precondition(format!(
            "detection needs size 3(n-1) for n = {n} read variables, got {sigma}"
        )));
    }
    if partition_into_widgets(&c).is_none() {
        return Ok(XorVerdict::Neither);
    }
    let zero = vec![false; c.num_inputs()];
    Ok(if c.eval_unchecked(&zero) {
        XorVerdict::NotXor
    } else {
        XorVerdict::Xor
    })
}

/// A two-input widget circuit placed over inputs `x1, x2` of a larger layout.
#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::truth_table;

    #[test]
    fn embedded_library_matches_enumeration() {
        let enumerated = enumerate_widgets();
        assert_eq!(widget_library().members(), &enumerated[..]);
    }

    #[test]
    #[ignore]
    fn print_enumeration() {
        for w in enumerate_widgets() {
            println!("{w}");
        }
    }

    #[test]
    fn library_examples() {
        let lib = widget_library();
        let std: Widget = "AND(x,!y) AND(!x,y) OR(g1,g2)".parse().unwrap();
        assert!(lib.lookup(&std).is_some());
        let dual: Widget = "OR(x,y) OR(!x,!y) AND(g1,g2)".parse().unwrap();
        assert_eq!(dual.table(), TruthTable::XOR);
        let dual_neg: Widget = "AND(x,y) AND(!x,!y) OR(g1,g2)".parse().unwrap();
        assert_eq!(dual_neg.table(), TruthTable::XNOR);
        assert!(lib.lookup(&dual).is_some());
        assert!(lib.lookup(&dual_neg).is_some());
        for w in lib.members() {
            assert_eq!(w.to_circuit().binary_gate_count(), 3);
        }
        assert!("AND(x,y) OR(g1,x)".parse::<Widget>().is_err());
    }

    #[test]
    fn no_two_gate_circuit_computes_xor() {
        let lits = [(1usize, false), (1, true), (2, false), (2, true)];
        for a in lits {
            for b in lits {
                for op1 in [false, true] {
                    for op2 in [false, true] {
                        for la in [false, true] {
                            for g2_lit in lits {
                                let t = TruthTable::from_fn(|x, y| {
                                    let v = |(i, n): (usize, bool)| n ^ if i == 1 { x } else { y };
                                    let g1 = if op1 { v(a) || v(b) } else { v(a) && v(b) };
                                    let g1 = g1 ^ la;
                                    if op2 {
                                        g1 || v(g2_lit)
                                    } else {
                                        g1 && v(g2_lit)
                                    }
                                });
                                assert!(t != TruthTable::XOR && t != TruthTable::XNOR);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn widget_canonical_form_is_label_invariant() {
        let a: Widget = "AND(x,!y) AND(!x,y) OR(g1,g2)".parse().unwrap();
        let b: Widget = "AND(!x,y) AND(x,!y) OR(g2,g1)".parse().unwrap();
        assert_eq!(a.canonical(), b.canonical());
    }

    #[test]
    fn single_widget_partitions_and_detects() {
        for (k, w) in widget_library().members().iter().enumerate() {
            let c = w.to_circuit();
            let p = partition_into_widgets(&c).expect("library member partitions");
            assert_eq!(p.blocks.len(), 1);
            assert_eq!(p.blocks[0].library_index, k);
            let expect = if w.table() == TruthTable::XOR {
                XorVerdict::Xor
            } else {
                XorVerdict::NotXor
            };
            assert_eq!(detect_xor(&c).unwrap(), expect);
            let tt = truth_table(&c).unwrap();
            assert_eq!(tt.to_string(), w.table().to_string());
        }
    }

    #[test]
    fn detect_rejects_wrong_size() {
        let mut b = CircuitBuilder::demorgan(2);
        let g = b.and(Node::Input(1), Node::Input(2));
        assert!(matches!(detect_xor(&b.build(g)), Err(Error::Precondition(_))));
        let lit = CircuitBuilder::demorgan(3).build(Node::Input(2));
        assert_eq!(detect_xor(&lit).unwrap(), XorVerdict::Xor);
    }

    #[test]
    fn and_chain_padded_to_size_is_neither() {
        // 9 gates over 4 inputs: (x1&x2), (x3|x4), combined and padded with
        // gates that keep every variable read.
        let mut b = CircuitBuilder::demorgan(4);
        let x = |i| Node::Input(i);
        let g1 = b.and(x(1), x(2));
        let g2 = b.and(g1, x(3));
        let g3 = b.and(g2, x(4));
        let g4 = b.or(x(1), x(3));
        let g5 = b.or(g4, x(2));
        let g6 = b.and(g3, g5);
        let g7 = b.or(x(2), x(4));
        let g8 = b.and(g6, g7);
        let g9 = b.or(g8, g1);
        let c = b.build(g9);
        let c = crate::rewrite::normalized(&c);
        assert_eq!(c.binary_gate_count(), 9);
        assert_eq!(detect_xor(&c).unwrap(), XorVerdict::Neither);
    }
}
