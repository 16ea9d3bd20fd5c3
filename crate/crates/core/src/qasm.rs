//! Parser and emitter for the OpenQASM subset used by the pipeline.
//!
//! The grammar is frozen in `docs/qasm-subset.md`. Multiple registers are
//! flattened to a single qubit/clbit index space at parse time, so emitted
//! text always uses one `q` and one `c` register. Instruction labels are an
//! in-memory annotation and are not serialized.

use std::fmt::Write as _;

use thiserror::Error;

use crate::circuit::{Circuit, Condition, Gate, Instruction};

/// Position of a token in the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
    pub offset: usize,
}

#[derive(Debug, Error, PartialEq)]
pub enum QasmError {
    #[error("syntax error at {0:?}: {1}")]
    Syntax(SourceSpan, String),
    #[error("unsupported construct at {0:?}: {1}")]
    Unsupported(SourceSpan, String),
    #[error("index out of range at {0:?}")]
    IndexOutOfRange(SourceSpan),
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Ident(String),
    Int(u64),
    Float(f64),
    Str(String),
    Semi,
    Comma,
    LParen,
    RParen,
    LBracket,
    RBracket,
    // Braces lex but nothing in the subset grammar accepts them; they only
    // show up in unsupported constructs like gate definitions.
    LBrace,
    RBrace,
    Arrow,
    EqEq,
    Minus,
}

#[derive(Debug, Clone)]
struct Spanned {
    token: Token,
    span: SourceSpan,
}

fn tokenize(text: &str) -> Result<Vec<Spanned>, QasmError> {
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    let mut line = 1;
    let mut col = 1;

    macro_rules! span {
        () => {
            SourceSpan {
                line,
                column: col,
                offset: i,
            }
        };
    }

    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            ' ' | '\t' | '\r' => {
                i += 1;
                col += 1;
            }
            '/' if i + 1 < bytes.len() && bytes[i + 1] == b'/' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            ';' | ',' | '(' | ')' | '[' | ']' | '{' | '}' => {
                let token = match c {
                    ';' => Token::Semi,
                    ',' => Token::Comma,
                    '(' => Token::LParen,
                    ')' => Token::RParen,
                    '[' => Token::LBracket,
                    ']' => Token::RBracket,
                    '{' => Token::LBrace,
                    _ => Token::RBrace,
                };
                out.push(Spanned {
                    token,
                    span: span!(),
                });
                i += 1;
                col += 1;
            }
            '-' => {
                let sp = span!();
                if i + 1 < bytes.len() && bytes[i + 1] == b'>' {
                    out.push(Spanned {
                        token: Token::Arrow,
                        span: sp,
                    });
                    i += 2;
                    col += 2;
                } else {
                    out.push(Spanned {
                        token: Token::Minus,
                        span: sp,
                    });
                    i += 1;
                    col += 1;
                }
            }
            '=' => {
                let sp = span!();
                if i + 1 < bytes.len() && bytes[i + 1] == b'=' {
                    out.push(Spanned {
                        token: Token::EqEq,
                        span: sp,
                    });
                    i += 2;
                    col += 2;
                } else {
                    return Err(QasmError::Syntax(sp, "expected '=='".into()));
                }
            }
            '"' => {
                let sp = span!();
                let start = i + 1;
                let mut end = start;
                while end < bytes.len() && bytes[end] != b'"' {
                    end += 1;
                }
                if end == bytes.len() {
                    return Err(QasmError::Syntax(sp, "unterminated string".into()));
                }
                out.push(Spanned {
                    token: Token::Str(text[start..end].to_string()),
                    span: sp,
                });
                col += end + 1 - i;
                i = end + 1;
            }
            c if c.is_ascii_digit() => {
                let sp = span!();
                let start = i;
                let mut is_float = false;
                while i < bytes.len() {
                    let d = bytes[i] as char;
                    if d.is_ascii_digit() {
                        i += 1;
                    } else if d == '.' || d == 'e' || d == 'E' {
                        is_float = true;
                        i += 1;
                        if (d == 'e' || d == 'E')
                            && i < bytes.len()
                            && (bytes[i] == b'+' || bytes[i] == b'-')
                        {
                            i += 1;
                        }
                    } else {
                        break;
                    }
                }
                let raw = &text[start..i];
                col += i - start;
                let token =
                    if is_float {
                        Token::Float(raw.parse().map_err(|_| {
                            QasmError::Syntax(sp, format!("bad float literal '{raw}'"))
                        })?)
                    } else {
                        Token::Int(raw.parse().map_err(|_| {
                            QasmError::Syntax(sp, format!("bad integer literal '{raw}'"))
                        })?)
                    };
                out.push(Spanned { token, span: sp });
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let sp = span!();
                let start = i;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                col += i - start;
                out.push(Spanned {
                    token: Token::Ident(text[start..i].to_string()),
                    span: sp,
                });
            }
            other => {
                return Err(QasmError::Syntax(
                    span!(),
                    format!("unexpected character '{other}'"),
                ));
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, PartialEq)]
enum RegKind {
    Quantum,
    Classical,
}

struct Register {
    kind: RegKind,
    offset: usize,
    size: usize,
}

struct Parser {
    tokens: Vec<Spanned>,
    pos: usize,
    registers: Vec<(String, Register)>,
    circuit: Circuit,
}

impl Parser {
    fn peek(&self) -> Option<&Spanned> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Spanned> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn last_span(&self) -> SourceSpan {
        self.tokens
            .get(self.pos.saturating_sub(1))
            .map(|t| t.span)
            .unwrap_or(SourceSpan {
                line: 1,
                column: 1,
                offset: 0,
            })
    }

    fn expect(&mut self, want: &Token, what: &str) -> Result<SourceSpan, QasmError> {
        match self.next() {
            Some(t) if &t.token == want => Ok(t.span),
            Some(t) => Err(QasmError::Syntax(t.span, format!("expected {what}"))),
            None => Err(QasmError::Syntax(
                self.last_span(),
                format!("expected {what}, found end of input"),
            )),
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<(String, SourceSpan), QasmError> {
        match self.next() {
            Some(Spanned {
                token: Token::Ident(s),
                span,
            }) => Ok((s, span)),
            Some(t) => Err(QasmError::Syntax(t.span, format!("expected {what}"))),
            None => Err(QasmError::Syntax(
                self.last_span(),
                format!("expected {what}, found end of input"),
            )),
        }
    }

    fn expect_int(&mut self, what: &str) -> Result<(u64, SourceSpan), QasmError> {
        match self.next() {
            Some(Spanned {
                token: Token::Int(v),
                span,
            }) => Ok((v, span)),
            Some(t) => Err(QasmError::Syntax(t.span, format!("expected {what}"))),
            None => Err(QasmError::Syntax(
                self.last_span(),
                format!("expected {what}, found end of input"),
            )),
        }
    }

    fn header(&mut self) -> Result<(), QasmError> {
        let (kw, span) = self.expect_ident("OPENQASM header")?;
        if kw != "OPENQASM" {
            return Err(QasmError::Syntax(
                span,
                "file must start with 'OPENQASM <version>;'".into(),
            ));
        }
        match self.next() {
            Some(Spanned {
                token: Token::Float(_),
                ..
            })
            | Some(Spanned {
                token: Token::Int(_),
                ..
            }) => {}
            Some(t) => return Err(QasmError::Syntax(t.span, "expected version number".into())),
            None => return Err(QasmError::Syntax(span, "expected version number".into())),
        }
        self.expect(&Token::Semi, "';' after version")?;
        // Optional include line; includes are not resolved.
        if let Some(Spanned {
            token: Token::Ident(id),
            ..
        }) = self.peek()
        {
            if id == "include" {
                self.next();
                match self.next() {
                    Some(Spanned {
                        token: Token::Str(_),
                        ..
                    }) => {}
                    Some(t) => {
                        return Err(QasmError::Syntax(
                            t.span,
                            "expected include filename string".into(),
                        ))
                    }
                    None => {
                        return Err(QasmError::Syntax(
                            self.last_span(),
                            "expected include filename string".into(),
                        ))
                    }
                }
                self.expect(&Token::Semi, "';' after include")?;
            }
        }
        Ok(())
    }

    fn lookup(&self, name: &str, span: SourceSpan) -> Result<&Register, QasmError> {
        self.registers
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, r)| r)
            .ok_or_else(|| QasmError::Syntax(span, format!("unknown register '{name}'")))
    }

    /// Parse `name[idx]` and resolve against registers of `kind`.
    fn operand(&mut self, kind: RegKind) -> Result<usize, QasmError> {
        let (name, span) = self.expect_ident("register operand")?;
        self.expect(&Token::LBracket, "'['")?;
        let (idx, idx_span) = self.expect_int("index")?;
        self.expect(&Token::RBracket, "']'")?;
        let reg = self.lookup(&name, span)?;
        if reg.kind != kind {
            let want = if kind == RegKind::Quantum {
                "quantum"
            } else {
                "classical"
            };
            return Err(QasmError::Syntax(
                span,
                format!("'{name}' is not a {want} register"),
            ));
        }
        if idx as usize >= reg.size {
            return Err(QasmError::IndexOutOfRange(idx_span));
        }
        Ok(reg.offset + idx as usize)
    }

    fn angle(&mut self) -> Result<f64, QasmError> {
        let negative = matches!(self.peek().map(|t| &t.token), Some(Token::Minus));
        if negative {
            self.next();
        }
        let value = match self.next() {
            Some(Spanned {
                token: Token::Float(v),
                ..
            }) => v,
            Some(Spanned {
                token: Token::Int(v),
                ..
            }) => v as f64,
            Some(t) => {
                return Err(QasmError::Syntax(
                    t.span,
                    "expected numeric angle literal".into(),
                ))
            }
            None => {
                return Err(QasmError::Syntax(
                    self.last_span(),
                    "expected numeric angle literal".into(),
                ))
            }
        };
        Ok(if negative { -value } else { value })
    }

    fn declare(&mut self, kind: RegKind) -> Result<(), QasmError> {
        let (name, span) = self.expect_ident("register name")?;
        if self.registers.iter().any(|(n, _)| *n == name) {
            return Err(QasmError::Syntax(
                span,
                format!("register '{name}' redeclared"),
            ));
        }
        self.expect(&Token::LBracket, "'['")?;
        let (size, _) = self.expect_int("register size")?;
        self.expect(&Token::RBracket, "']'")?;
        self.expect(&Token::Semi, "';'")?;
        let offset = match kind {
            RegKind::Quantum => {
                let o = self.circuit.num_qubits;
                self.circuit.num_qubits += size as usize;
                o
            }
            RegKind::Classical => {
                let o = self.circuit.num_clbits;
                self.circuit.num_clbits += size as usize;
                o
            }
        };
        self.registers.push((
            name,
            Register {
                kind,
                offset,
                size: size as usize,
            },
        ));
        Ok(())
    }

    fn statement(&mut self) -> Result<(), QasmError> {
        let (name, span) = self.expect_ident("statement")?;
        match name.as_str() {
            "qreg" => return self.declare(RegKind::Quantum),
            "creg" => return self.declare(RegKind::Classical),
            _ => {}
        }

        let mut condition = None;
        let name = if name == "if" {
            self.expect(&Token::LParen, "'('")?;
            let bit = self.operand(RegKind::Classical)?;
            self.expect(&Token::EqEq, "'=='")?;
            let (value, vspan) = self.expect_int("0 or 1")?;
            if value > 1 {
                return Err(QasmError::Unsupported(
                    vspan,
                    "multi-bit condition value".into(),
                ));
            }
            self.expect(&Token::RParen, "')'")?;
            condition = Some(Condition {
                bit,
                value: value == 1,
            });
            let (inner, _) = self.expect_ident("conditioned operation")?;
            inner
        } else {
            name
        };

        let mut inst = match name.as_str() {
            "h" | "x" | "y" | "z" | "sx" => {
                let gate = match name.as_str() {
                    "h" => Gate::H,
                    "x" => Gate::X,
                    "y" => Gate::Y,
                    "z" => Gate::Z,
                    _ => Gate::Sx,
                };
                let q = self.operand(RegKind::Quantum)?;
                Instruction::new(gate, vec![q])
            }
            "rx" | "ry" | "rz" => {
                self.expect(&Token::LParen, "'('")?;
                let theta = self.angle()?;
                self.expect(&Token::RParen, "')'")?;
                let q = self.operand(RegKind::Quantum)?;
                let gate = match name.as_str() {
                    "rx" => Gate::Rx(theta),
                    "ry" => Gate::Ry(theta),
                    _ => Gate::Rz(theta),
                };
                Instruction::new(gate, vec![q])
            }
            "cx" | "swap" => {
                let a = self.operand(RegKind::Quantum)?;
                self.expect(&Token::Comma, "','")?;
                let b = self.operand(RegKind::Quantum)?;
                let gate = if name == "cx" { Gate::Cx } else { Gate::Swap };
                Instruction::new(gate, vec![a, b])
            }
            "measure" => {
                let q = self.operand(RegKind::Quantum)?;
                self.expect(&Token::Arrow, "'->'")?;
                let c = self.operand(RegKind::Classical)?;
                Instruction::new(Gate::Measure { clbit: c }, vec![q])
            }
            "reset" => {
                let q = self.operand(RegKind::Quantum)?;
                Instruction::new(Gate::Reset, vec![q])
            }
            "barrier" => {
                let mut qs = vec![self.operand(RegKind::Quantum)?];
                while matches!(self.peek().map(|t| &t.token), Some(Token::Comma)) {
                    self.next();
                    qs.push(self.operand(RegKind::Quantum)?);
                }
                Instruction::new(Gate::Barrier, qs)
            }
            "delay" => {
                self.expect(&Token::LBracket, "'['")?;
                let (d, _) = self.expect_int("delay duration")?;
                self.expect(&Token::RBracket, "']'")?;
                let q = self.operand(RegKind::Quantum)?;
                Instruction::new(Gate::Delay { duration: d }, vec![q])
            }
            other => {
                return Err(QasmError::Unsupported(span, other.to_string()));
            }
        };
        inst.condition = condition;
        self.expect(&Token::Semi, "';'")?;
        self.circuit.push(inst);
        Ok(())
    }
}

/// Parse QASM source into a circuit with flat qubit/clbit indices.
pub fn parse(text: &str) -> Result<Circuit, QasmError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        registers: Vec::new(),
        circuit: Circuit::new(0, 0),
    };
    parser.header()?;
    while parser.peek().is_some() {
        parser.statement()?;
    }
    let circuit = parser.circuit;
    circuit.validate().map_err(|e| {
        QasmError::Syntax(
            SourceSpan {
                line: 0,
                column: 0,
                offset: 0,
            },
            e.to_string(),
        )
    })?;
    Ok(circuit)
}

/// Emit canonical QASM text that re-parses to an equal circuit.
pub fn emit(circuit: &Circuit) -> String {
    let mut out = String::new();
    out.push_str("OPENQASM 2.0;\n");
    out.push_str("include \"qelib1.inc\";\n");
    if circuit.num_qubits > 0 {
        let _ = writeln!(out, "qreg q[{}];", circuit.num_qubits);
    }
    if circuit.num_clbits > 0 {
        let _ = writeln!(out, "creg c[{}];", circuit.num_clbits);
    }
    for inst in &circuit.instructions {
        if let Some(cond) = inst.condition {
            let _ = write!(out, "if (c[{}]=={}) ", cond.bit, cond.value as u8);
        }
        let q = |i: usize| format!("q[{}]", inst.qubits[i]);
        let line = match inst.gate {
            Gate::H => format!("h {};", q(0)),
            Gate::X => format!("x {};", q(0)),
            Gate::Y => format!("y {};", q(0)),
            Gate::Z => format!("z {};", q(0)),
            Gate::Sx => format!("sx {};", q(0)),
            Gate::Rx(t) => format!("rx({}) {};", t, q(0)),
            Gate::Ry(t) => format!("ry({}) {};", t, q(0)),
            Gate::Rz(t) => format!("rz({}) {};", t, q(0)),
            Gate::Cx => format!("cx {},{};", q(0), q(1)),
            Gate::Swap => format!("swap {},{};", q(0), q(1)),
            Gate::Measure { clbit } => format!("measure {} -> c[{}];", q(0), clbit),
            Gate::Reset => format!("reset {};", q(0)),
            Gate::Barrier => {
                let args: Vec<String> = (0..inst.qubits.len()).map(q).collect();
                format!("barrier {};", args.join(","))
            }
            Gate::Delay { duration } => format!("delay[{}] {};", duration, q(0)),
        };
        out.push_str(&line);
        out.push('\n');
    }
    out
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn parses_profiling_sequence() {
        let src = "OPENQASM 2.0;\nqreg q[1];\ncreg c[2];\n\
                   x q[0]; measure q[0] -> c[0]; reset q[0]; measure q[0] -> c[1];";
        let c = parse(src).unwrap();
        assert_eq!(c.num_qubits, 1);
        assert_eq!(c.num_clbits, 2);
        assert_eq!(c.instructions.len(), 4);
        assert_eq!(crate::circuit::mcm_intensity(&c).0, vec![1]);
    }

    #[test]
    fn empty_body_is_empty_circuit() {
        let c = parse("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n").unwrap();
        assert_eq!(c, Circuit::new(0, 0));
    }

    #[test]
    fn flattens_multiple_registers() {
        let src = "OPENQASM 2.0;\nqreg a[2];\nqreg b[2];\ncreg m[1];\ncx a[1],b[0];\nmeasure b[1] -> m[0];";
        let c = parse(src).unwrap();
        assert_eq!(c.num_qubits, 4);
        assert_eq!(c.instructions[0].qubits, vec![1, 2]);
        assert_eq!(c.instructions[1].qubits, vec![3]);
    }

    #[test]
    fn conditions_and_delays() {
        let src = "OPENQASM 2.0;\nqreg q[2];\ncreg c[1];\n\
                   measure q[0] -> c[0];\nif (c[0]==1) x q[1];\ndelay[160] q[0];\nbarrier q[0],q[1];";
        let c = parse(src).unwrap();
        assert_eq!(
            c.instructions[1].condition,
            Some(Condition {
                bit: 0,
                value: true
            })
        );
        assert_eq!(c.instructions[2].gate, Gate::Delay { duration: 160 });
        assert_eq!(c.instructions[3].qubits, vec![0, 1]);
    }

    #[test]
    fn rejects_unsupported_constructs() {
        let err = parse("OPENQASM 2.0;\nqreg q[2];\nt q[0];").unwrap_err();
        assert!(matches!(err, QasmError::Unsupported(_, ref s) if s == "t"));

        let err = parse("OPENQASM 2.0;\ngate foo a { h a; }").unwrap_err();
        assert!(matches!(err, QasmError::Unsupported(_, ref s) if s == "gate"));
    }

    #[test]
    fn rejects_out_of_range_indices() {
        let err = parse("OPENQASM 2.0;\nqreg q[2];\nh q[2];").unwrap_err();
        assert!(matches!(err, QasmError::IndexOutOfRange(_)));
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = parse("OPENQASM 2.0;\nqreg q[1];\nh q[0]").unwrap_err();
        assert!(matches!(err, QasmError::Syntax(_, _)));
        let err = parse("OPENQASM 2.0;\nqreg q[1];\nh q 0];").unwrap_err();
        match err {
            QasmError::Syntax(span, _) => assert_eq!(span.line, 3),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    pub(crate) fn random_supported_circuit(rng: &mut StdRng) -> Circuit {
        let nq = rng.gen_range(1..=6);
        let nc = rng.gen_range(1..=4);
        let mut c = Circuit::new(nq, nc);
        let mut written: Vec<usize> = Vec::new();
        for _ in 0..rng.gen_range(0..30) {
            let q = rng.gen_range(0..nq);
            match rng.gen_range(0..10) {
                0 => {
                    c.h(q);
                }
                1 => {
                    c.x(q);
                }
                2 => {
                    c.sx(q);
                }
                3 => {
                    c.ry(rng.gen_range(-3.2..3.2), q);
                }
                4 if nq > 1 => {
                    let b = (q + rng.gen_range(1..nq)) % nq;
                    c.cx(q, b);
                }
                5 if nq > 1 => {
                    let b = (q + rng.gen_range(1..nq)) % nq;
                    c.swap(q, b);
                }
                6 => {
                    let bit = rng.gen_range(0..nc);
                    c.measure(q, bit);
                    written.push(bit);
                }
                7 => {
                    c.reset(q);
                }
                8 => {
                    c.delay(q, rng.gen_range(0..2000));
                }
                _ => {
                    if !written.is_empty() {
                        let bit = written[rng.gen_range(0..written.len())];
                        let value = rng.gen_bool(0.5);
                        c.push(Instruction::new(Gate::Z, vec![q]).with_condition(bit, value));
                    } else {
                        c.barrier(vec![q]);
                    }
                }
            }
        }
        c
    }

    #[test]
    fn round_trip_identity_on_random_circuits() {
        let mut rng = StdRng::seed_from_u64(97);
        for _ in 0..100 {
            let c = random_supported_circuit(&mut rng);
            let text = emit(&c);
            let back = parse(&text).unwrap_or_else(|e| panic!("{e}\n{text}"));
            assert_eq!(back, c, "round trip mismatch for:\n{text}");
        }
    }

    #[test]
    fn mutations_round_trip_or_error() {
        // The parser may reject a mutated source but must never mis-parse:
        // anything it accepts has to survive emit → parse unchanged.
        let mut rng = StdRng::seed_from_u64(41);
        let base = emit(&random_supported_circuit(&mut rng));
        let charset = b";,[]()>=xhq0123456789 ";
        for _ in 0..300 {
            let mut text = base.clone().into_bytes();
            let pos = rng.gen_range(0..text.len());
            match rng.gen_range(0..3) {
                0 => text[pos] = charset[rng.gen_range(0..charset.len())],
                1 => {
                    text.insert(pos, charset[rng.gen_range(0..charset.len())]);
                }
                _ => {
                    text.remove(pos);
                }
            }
            let Ok(text) = String::from_utf8(text) else {
                continue;
            };
            if let Ok(c) = parse(&text) {
                let again = parse(&emit(&c)).unwrap();
                assert_eq!(again, c);
            }
        }
    }
}
