//! Text formats for circuits and affine subspaces.

use std::collections::HashMap;
use std::fmt::Write as _;

use gatelim::circuit::{bits_to_string, Basis, Circuit, Gate, GateKind, InputLayout, Node, TruthTable};
use gatelim::gf2::{AffineSubspace, BitMatrix, BitVec};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("{0}")]
    Invalid(String),
}

fn syntax(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Syntax {
        line,
        message: message.into(),
    }
}

/// Non-empty lines with comments stripped, paired with 1-based line numbers.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(k, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((k + 1, l))
    })
}

fn parse_layout(line: usize, args: &[&str]) -> Result<InputLayout, FormatError> {
    match args {
        [n] => n
            .parse()
            .map(InputLayout::Plain)
            .map_err(|_| syntax(line, format!("bad input count `{n}`"))),
        [a, d] => {
            let field = |s: &str, key: &str| {
                s.strip_prefix(key)
                    .and_then(|v| v.parse::<usize>().ok())
                    .ok_or_else(|| syntax(line, format!("expected `{key}<count>`, got `{s}`")))
            };
            let addr = field(a, "addr=")?;
            let data = field(d, "data=")?;
            if addr >= 32 || data != 1 << addr {
                return Err(syntax(line, format!("{addr} address bits need {} data bits", 1u64 << addr.min(63))));
            }
            Ok(InputLayout::Mux { addr, data })
        }
        _ => Err(syntax(line, "expected `inputs n` or `inputs addr=n data=N`")),
    }
}

struct Names {
    layout: InputLayout,
    gates: HashMap<String, usize>,
}

impl Names {
    fn node(&self, line: usize, s: &str) -> Result<Node, FormatError> {
        let index = |rest: &str| rest.parse::<usize>().ok().filter(|&i| i > 0);
        let found = match s {
            "0" => Some(Node::Const(false)),
            "1" => Some(Node::Const(true)),
            _ if s.starts_with('g') => self.gates.get(s).map(|&g| Node::Gate(g)),
            _ => match (self.layout, s.split_at_checked(1)) {
                (InputLayout::Plain(n), Some(("x", rest))) => index(rest).filter(|&i| i <= n).map(Node::Input),
                (InputLayout::Mux { addr, .. }, Some(("a", rest))) => {
                    index(rest).filter(|&i| i <= addr).map(Node::Input)
                }
                (InputLayout::Mux { addr, data }, Some(("x", rest))) => {
                    index(rest).filter(|&i| i <= data).map(|i| Node::Input(addr + i))
                }
                _ => None,
            },
        };
        found.ok_or_else(|| syntax(line, format!("unknown source `{s}`")))
    }
}

/// Parses the line-based circuit format and validates the result.
pub fn parse_circuit(text: &str) -> Result<Circuit, FormatError> {
    let mut basis = None;
    let mut names: Option<Names> = None;
    let mut gates = Vec::new();
    let mut output = None;
    for (line, l) in lines(text) {
        let words: Vec<&str> = l.split_whitespace().collect();
        if output.is_some() {
            return Err(syntax(line, "nothing may follow `output`"));
        }
        match words[0] {
            "basis" => {
                if basis.is_some() || words.len() != 2 {
                    return Err(syntax(line, "expected a single `basis demorgan|b2` line"));
                }
                basis = Some(match words[1] {
                    "demorgan" => Basis::DeMorgan,
                    "b2" => Basis::B2,
                    other => return Err(syntax(line, format!("unknown basis `{other}`"))),
                });
            }
            "inputs" => {
                if basis.is_none() || names.is_some() {
                    return Err(syntax(line, "`inputs` must follow `basis` and appear once"));
                }
                names = Some(Names {
                    layout: parse_layout(line, &words[1..])?,
                    gates: HashMap::new(),
                });
            }
            "gate" => {
                let names = names.as_mut().ok_or_else(|| syntax(line, "`gate` before `inputs`"))?;
                if words.len() < 4 || words[2] != "=" || !words[1].starts_with('g') {
                    return Err(syntax(line, "expected `gate g<k> = KIND sources...`"));
                }
                let src = |s| names.node(line, s);
                let gate = match &words[3..] {
                    ["NOT", a] => Gate::not(src(a)?),
                    ["AND", a, b] => Gate::and(src(a)?, src(b)?),
                    ["OR", a, b] => Gate::or(src(a)?, src(b)?),
                    ["B2", t, a, b] => {
                        let t: TruthTable = t
                            .parse()
                            .map_err(|_| syntax(line, format!("bad truth table `{t}`")))?;
                        Gate::table(t, src(a)?, src(b)?)
                    }
                    _ => return Err(syntax(line, format!("cannot read gate `{}`", words[3..].join(" ")))),
                };
                if names.gates.insert(words[1].to_string(), gates.len()).is_some() {
                    return Err(syntax(line, format!("gate {} declared twice", words[1])));
                }
                gates.push(gate);
            }
            "output" => {
                let names = names.as_ref().ok_or_else(|| syntax(line, "`output` before `inputs`"))?;
                if words.len() != 2 {
                    return Err(syntax(line, "expected `output <src>`"));
                }
                output = Some(match words[1].strip_prefix('!') {
                    Some(s) => (names.node(line, s)?, true),
                    None => (names.node(line, words[1])?, false),
                });
            }
            other => return Err(syntax(line, format!("unknown directive `{other}`"))),
        }
    }
    let basis = basis.ok_or_else(|| FormatError::Invalid("missing `basis` line".into()))?;
    let names = names.ok_or_else(|| FormatError::Invalid("missing `inputs` line".into()))?;
    let (out, neg) = output.ok_or_else(|| FormatError::Invalid("missing `output` line".into()))?;
    let c = Circuit::from_parts(basis, names.layout, gates, out, neg);
    c.validate().map_err(|errs| {
        FormatError::Invalid(errs.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; "))
    })?;
    Ok(c)
}

fn node_name(layout: InputLayout, n: Node) -> String {
    match n {
        Node::Const(b) => (b as u8).to_string(),
        Node::Input(i) => layout.name(i),
        Node::Gate(g) => format!("g{}", g + 1),
    }
}

/// Prints a circuit in the format [`parse_circuit`] reads.
pub fn print_circuit(c: &Circuit) -> String {
    let layout = c.layout();
    let name = |n| node_name(layout, n);
    let mut out = String::new();
    writeln!(out, "basis {}", c.basis()).unwrap();
    match layout {
        InputLayout::Plain(n) => writeln!(out, "inputs {n}").unwrap(),
        InputLayout::Mux { addr, data } => writeln!(out, "inputs addr={addr} data={data}").unwrap(),
    }
    for (id, g) in c.gates().iter().enumerate() {
        let s = g.sources();
        let body = match g.kind() {
            GateKind::Not => format!("NOT {}", name(s[0])),
            GateKind::And => format!("AND {} {}", name(s[0]), name(s[1])),
            GateKind::Or => format!("OR {} {}", name(s[0]), name(s[1])),
            GateKind::Table(t) => format!("B2 {t} {} {}", name(s[0]), name(s[1])),
        };
        writeln!(out, "gate g{} = {body}", id + 1).unwrap();
    }
    let bang = if c.output_negated() { "!" } else { "" };
    writeln!(out, "output {bang}{}", name(c.output())).unwrap();
    out
}

fn parse_vec(line: usize, s: &str, n: usize) -> Result<BitVec, FormatError> {
    let v: BitVec = s.parse().map_err(|_| syntax(line, format!("bad bit string `{s}`")))?;
    if v.len() != n {
        return Err(syntax(line, format!("expected {n} bits, got {}", v.len())));
    }
    Ok(v)
}

/// Parses `ambient n`, `dim k`, `k` direction columns and `offset <bits>`.
pub fn parse_subspace(text: &str) -> Result<AffineSubspace, FormatError> {
    let mut it = lines(text);
    let mut header = |key: &str| -> Result<usize, FormatError> {
        let (line, l) = it.next().ok_or_else(|| FormatError::Invalid(format!("missing `{key}` line")))?;
        l.strip_prefix(key)
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| syntax(line, format!("expected `{key} <count>`")))
    };
    let n = header("ambient")?;
    let dim = header("dim")?;
    let mut cols = Vec::with_capacity(dim);
    for _ in 0..dim {
        let (line, l) = it.next().ok_or_else(|| FormatError::Invalid(format!("expected {dim} direction lines")))?;
        cols.push(parse_vec(line, l, n)?);
    }
    let (line, l) = it.next().ok_or_else(|| FormatError::Invalid("missing `offset` line".into()))?;
    let offset = l
        .strip_prefix("offset")
        .ok_or_else(|| syntax(line, "expected `offset <bits>`"))
        .and_then(|v| parse_vec(line, v.trim(), n))?;
    if let Some((line, _)) = it.next() {
        return Err(syntax(line, "unexpected text after `offset`"));
    }
    let m = BitMatrix::from_columns(n, &cols).map_err(|e| FormatError::Invalid(e.to_string()))?;
    if m.rank() != dim {
        return Err(FormatError::Invalid("direction columns are linearly dependent".into()));
    }
    AffineSubspace::new(m, offset).map_err(|e| FormatError::Invalid(e.to_string()))
}

pub fn print_subspace(s: &AffineSubspace) -> String {
    let mut out = format!("ambient {}\ndim {}\n", s.ambient(), s.dim());
    for c in s.direction().columns() {
        writeln!(out, "{c}").unwrap();
    }
    writeln!(out, "offset {}", s.offset()).unwrap();
    out
}

/// Direction columns and offset as bit strings.
pub fn subspace_strings(s: &AffineSubspace) -> (Vec<String>, String) {
    let cols = s.direction().columns().iter().map(|c| bits_to_string(&c.to_bools())).collect();
    (cols, s.offset().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "# xor of two inputs
basis demorgan
inputs 2
gate g1 = NOT x1
gate g2 = NOT x2
gate g3 = AND x1 g2
gate g4 = AND g1 x2
gate g5 = OR g3 g4
output g5
";

    #[test]
    fn circuit_round_trip() {
        let c = parse_circuit(SAMPLE).unwrap();
        assert_eq!(c.binary_gate_count(), 3);
        let printed = print_circuit(&c);
        assert_eq!(parse_circuit(&printed).unwrap(), c);
        assert_eq!(printed, SAMPLE.lines().skip(1).map(|l| format!("{l}\n")).collect::<String>());
    }

    #[test]
    fn b2_and_mux_layouts() {
        let c = parse_circuit("basis b2\ninputs 2\ngate g1 = B2 0110 x1 x2\noutput !g1\n").unwrap();
        assert!(c.output_negated());
        assert!(!c.evaluate(&[true, false]).unwrap());
        let m = parse_circuit("basis demorgan\ninputs addr=1 data=2\ngate g1 = AND a1 x2\noutput g1\n").unwrap();
        assert_eq!(m.gate(0).sources(), &[Node::Input(1), Node::Input(3)]);
        assert_eq!(parse_circuit(&print_circuit(&m)).unwrap(), m);
    }

    #[test]
    fn rejects_malformed_circuits() {
        for (text, line) in [
            ("basis demorgan\ninputs 2\ngate g1 = AND x1 x3\noutput g1\n", Some(3)),
            ("basis demorgan\ninputs 2\ngate g1 = AND x1 g2\noutput g1\n", Some(3)),
            ("basis dm\n", Some(1)),
            ("basis demorgan\ninputs 2\ngate g1 = AND é1 x2\noutput g1\n", Some(3)),
            ("basis demorgan\ninputs addr=2 data=3\n", Some(2)),
            ("basis demorgan\ninputs 2\ngate g1 = XOR x1 x2\noutput g1\n", Some(3)),
            ("basis demorgan\ninputs 2\n", None),
        ] {
            match parse_circuit(text) {
                Err(FormatError::Syntax { line: l, .. }) => assert_eq!(Some(l), line, "{text}"),
                Err(FormatError::Invalid(_)) => assert_eq!(line, None, "{text}"),
                Ok(_) => panic!("accepted {text}"),
            }
        }
        assert!(parse_circuit("basis demorgan\ninputs 2\ngate g1 = B2 0110 x1 x2\noutput g1\n").is_err());
    }

    #[test]
    fn random_circuits_round_trip() {
        use gatelim::harness::{generate, random_circuit, GenKind, GenSpec, RandomCircuit};
        use gatelim::rewrite::normalized;
        for seed in 0..300u64 {
            let spec = RandomCircuit {
                basis: if seed % 2 == 0 { Basis::B2 } else { Basis::DeMorgan },
                inputs: 1 + (seed % 9) as usize,
                gates: (seed % 40) as usize,
                constants: seed % 3 == 0,
                not_gates: true,
            };
            let c = random_circuit(&spec, seed);
            assert_eq!(parse_circuit(&print_circuit(&c)).unwrap(), c);
            let n = normalized(&c);
            let text = print_circuit(&n);
            assert_eq!(print_circuit(&parse_circuit(&text).unwrap()), text);
            let m = generate(&GenSpec::new(GenKind::MuxCandidate, 1 + (seed % 3) as usize, seed)).unwrap();
            assert_eq!(parse_circuit(&print_circuit(&m.circuit)).unwrap(), m.circuit);
        }
    }

    #[test]
    fn subspace_round_trip() {
        let text = "ambient 3\ndim 2\n100\n011\noffset 001\n";
        let s = parse_subspace(text).unwrap();
        assert_eq!(s.dim(), 2);
        assert_eq!(print_subspace(&s), text);
        assert!(parse_subspace("ambient 3\ndim 2\n100\n100\noffset 001\n").is_err());
        assert!(parse_subspace("ambient 3\ndim 1\n10\noffset 001\n").is_err());
    }
}
