//! A small OpenQASM 2.0 reader covering the subset used by the benchmark
//! circuits: a single quantum register and gates from
//! {u/u3, u1, rz, h, x, z, cx, cz, cp/cu1}.
//!
//! Barriers are ignored; measurements, classical registers, gate
//! definitions and control flow are rejected with a line-tagged
//! diagnostic.

use super::{rewrite_to_basis, schedule, Circuit, Program, RawGate};
use crate::error::{CircuitError, QasmError, QasmErrorKind};

/// Parse OpenQASM 2.0 text, rewrite to the {U, CP} basis and schedule ASAP.
pub fn parse_qasm(text: &str) -> Result<Circuit, CircuitError> {
    let program = parse_program(text)?;
    let gates = rewrite_to_basis(&program);
    schedule(program.num_qubits, &gates)
}

/// Parse OpenQASM 2.0 text into an unscheduled [`Program`].
pub fn parse_program(text: &str) -> Result<Program, QasmError> {
    let toks = lex(text)?;
    Parser {
        toks,
        pos: 0,
        num_qubits: None,
        reg_name: None,
        gates: Vec::new(),
    }
    .parse()
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64),
    Str(String),
    Sym(char),
}

#[derive(Debug, Clone)]
struct SpannedTok {
    tok: Tok,
    line: usize,
}

fn lex(text: &str) -> Result<Vec<SpannedTok>, QasmError> {
    let mut toks = Vec::new();
    let mut chars = text.chars().peekable();
    let mut line = 1usize;
    while let Some(&c) = chars.peek() {
        match c {
            '\n' => {
                line += 1;
                chars.next();
            }
            c if c.is_whitespace() => {
                chars.next();
            }
            '/' => {
                chars.next();
                if chars.peek() == Some(&'/') {
                    while let Some(&c) = chars.peek() {
                        if c == '\n' {
                            break;
                        }
                        chars.next();
                    }
                } else {
                    toks.push(SpannedTok {
                        tok: Tok::Sym('/'),
                        line,
                    });
                }
            }
            '"' => {
                chars.next();
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some('"') => break,
                        Some('\n') | None => {
                            return Err(QasmError {
                                line,
                                kind: QasmErrorKind::Syntax("unterminated string".into()),
                            })
                        }
                        Some(c) => s.push(c),
                    }
                }
                toks.push(SpannedTok {
                    tok: Tok::Str(s),
                    line,
                });
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        s.push(c);
                        chars.next();
                    } else {
                        break;
                    }
                }
                toks.push(SpannedTok {
                    tok: Tok::Ident(s),
                    line,
                });
            }
            c if c.is_ascii_digit() || c == '.' => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E' {
                        s.push(c);
                        chars.next();
                        // allow an exponent sign right after e/E
                        if (s.ends_with('e') || s.ends_with('E'))
                            && matches!(chars.peek(), Some('+') | Some('-'))
                        {
                            s.push(chars.next().unwrap());
                        }
                    } else {
                        break;
                    }
                }
                let value: f64 = s.parse().map_err(|_| QasmError {
                    line,
                    kind: QasmErrorKind::Syntax(format!("bad number `{s}`")),
                })?;
                toks.push(SpannedTok {
                    tok: Tok::Number(value),
                    line,
                });
            }
            '(' | ')' | '[' | ']' | '{' | '}' | ',' | ';' | '+' | '-' | '*' | '>' | '=' => {
                chars.next();
                toks.push(SpannedTok {
                    tok: Tok::Sym(c),
                    line,
                });
            }
            other => {
                return Err(QasmError {
                    line,
                    kind: QasmErrorKind::Syntax(format!("unexpected character `{other}`")),
                })
            }
        }
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<SpannedTok>,
    pos: usize,
    num_qubits: Option<u32>,
    reg_name: Option<String>,
    gates: Vec<RawGate>,
}

impl Parser {
    fn line(&self) -> usize {
        self.toks
            .get(self.pos.min(self.toks.len().saturating_sub(1)))
            .map(|t| t.line)
            .unwrap_or(1)
    }

    fn err(&self, kind: QasmErrorKind) -> QasmError {
        QasmError {
            line: self.line(),
            kind,
        }
    }

    fn syntax(&self, msg: impl Into<String>) -> QasmError {
        self.err(QasmErrorKind::Syntax(msg.into()))
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.tok.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect_sym(&mut self, c: char) -> Result<(), QasmError> {
        match self.next() {
            Some(Tok::Sym(s)) if s == c => Ok(()),
            other => Err(self.syntax(format!("expected `{c}`, got {other:?}"))),
        }
    }

    fn parse(mut self) -> Result<Program, QasmError> {
        while self.peek().is_some() {
            self.statement()?;
        }
        let num_qubits = self
            .num_qubits
            .ok_or_else(|| self.syntax("no quantum register declared"))?;
        Ok(Program {
            num_qubits,
            gates: self.gates,
        })
    }

    fn statement(&mut self) -> Result<(), QasmError> {
        let Some(tok) = self.next() else {
            return Ok(());
        };
        let name = match tok {
            Tok::Ident(name) => name,
            other => return Err(self.syntax(format!("expected statement, got {other:?}"))),
        };
        match name.as_str() {
            "OPENQASM" => {
                match self.next() {
                    Some(Tok::Number(v)) if v == 2.0 => {}
                    Some(Tok::Number(v)) => {
                        return Err(self.err(QasmErrorKind::Unsupported(format!(
                            "OPENQASM version {v}, only 2.0 is supported"
                        ))))
                    }
                    _ => return Err(self.syntax("expected version after OPENQASM")),
                }
                self.expect_sym(';')
            }
            "include" => {
                match self.next() {
                    Some(Tok::Str(file)) if file == "qelib1.inc" => {}
                    Some(Tok::Str(file)) => {
                        return Err(self
                            .err(QasmErrorKind::Unsupported(format!("include \"{file}\""))))
                    }
                    _ => return Err(self.syntax("expected file name after include")),
                }
                self.expect_sym(';')
            }
            "qreg" => {
                if self.num_qubits.is_some() {
                    return Err(self.err(QasmErrorKind::Unsupported(
                        "multiple quantum registers".into(),
                    )));
                }
                let reg = match self.next() {
                    Some(Tok::Ident(r)) => r,
                    _ => return Err(self.syntax("expected register name")),
                };
                self.expect_sym('[')?;
                let size = match self.next() {
                    Some(Tok::Number(v)) if v >= 1.0 && v.fract() == 0.0 => v as u32,
                    _ => return Err(self.syntax("expected register size")),
                };
                self.expect_sym(']')?;
                self.expect_sym(';')?;
                self.num_qubits = Some(size);
                self.reg_name = Some(reg);
                Ok(())
            }
            "barrier" => {
                // ignored: skip to end of statement
                while let Some(tok) = self.next() {
                    if tok == Tok::Sym(';') {
                        break;
                    }
                }
                Ok(())
            }
            "creg" | "measure" | "reset" | "if" | "gate" | "opaque" => {
                Err(self.err(QasmErrorKind::Unsupported(name)))
            }
            _ => self.gate_statement(name),
        }
    }

    fn gate_statement(&mut self, name: String) -> Result<(), QasmError> {
        let gate_line = if self.pos > 0 {
            self.toks[self.pos - 1].line
        } else {
            self.line()
        };
        let (n_params, n_qubits) = match name.as_str() {
            "u" | "u3" => (3, 1),
            "u1" | "rz" => (1, 1),
            "h" | "x" | "z" => (0, 1),
            "cx" | "cz" => (0, 2),
            "cp" | "cu1" => (1, 2),
            _ => {
                return Err(QasmError {
                    line: gate_line,
                    kind: QasmErrorKind::UnknownGate(name),
                })
            }
        };
        let mut params = Vec::new();
        if self.peek() == Some(&Tok::Sym('(')) {
            self.next();
            loop {
                params.push(self.expr()?);
                match self.next() {
                    Some(Tok::Sym(',')) => continue,
                    Some(Tok::Sym(')')) => break,
                    _ => return Err(self.syntax("expected `,` or `)` in parameter list")),
                }
            }
        }
        if params.len() != n_params {
            return Err(QasmError {
                line: gate_line,
                kind: QasmErrorKind::Syntax(format!(
                    "gate `{name}` takes {n_params} parameter(s), got {}",
                    params.len()
                )),
            });
        }
        let mut args = Vec::new();
        loop {
            args.push(self.qubit_arg()?);
            match self.next() {
                Some(Tok::Sym(',')) => continue,
                Some(Tok::Sym(';')) => break,
                _ => return Err(self.syntax("expected `,` or `;` after qubit argument")),
            }
        }
        let size = self.num_qubits.ok_or_else(|| QasmError {
            line: gate_line,
            kind: QasmErrorKind::Syntax("gate before qreg declaration".into()),
        })?;
        // broadcast `h q;` over the register for single-qubit gates
        let expanded: Vec<Vec<u32>> = if n_qubits == 1 && args.len() == 1 && args[0].is_none() {
            (0..size).map(|q| vec![q]).collect()
        } else {
            if args.len() != n_qubits {
                return Err(QasmError {
                    line: gate_line,
                    kind: QasmErrorKind::Syntax(format!(
                        "gate `{name}` takes {n_qubits} qubit(s), got {}",
                        args.len()
                    )),
                });
            }
            let mut concrete = Vec::with_capacity(args.len());
            for a in &args {
                match a {
                    Some(q) => {
                        if *q as usize >= size as usize {
                            return Err(QasmError {
                                line: gate_line,
                                kind: QasmErrorKind::QubitOutOfRange {
                                    index: *q as usize,
                                    size: size as usize,
                                },
                            });
                        }
                        concrete.push(*q);
                    }
                    None => {
                        return Err(QasmError {
                            line: gate_line,
                            kind: QasmErrorKind::Unsupported(
                                "register broadcast on multi-qubit gate".into(),
                            ),
                        })
                    }
                }
            }
            vec![concrete]
        };
        for qs in expanded {
            let gate = match name.as_str() {
                "u" | "u3" => RawGate::U {
                    qubit: qs[0],
                    theta: params[0],
                    phi: params[1],
                    lambda: params[2],
                },
                "u1" => RawGate::U1 {
                    qubit: qs[0],
                    lambda: params[0],
                },
                "rz" => RawGate::Rz {
                    qubit: qs[0],
                    lambda: params[0],
                },
                "h" => RawGate::H { qubit: qs[0] },
                "x" => RawGate::X { qubit: qs[0] },
                "z" => RawGate::Z { qubit: qs[0] },
                "cx" => RawGate::Cx {
                    control: qs[0],
                    target: qs[1],
                },
                "cz" => RawGate::Cz {
                    control: qs[0],
                    target: qs[1],
                },
                "cp" | "cu1" => RawGate::Cp {
                    control: qs[0],
                    target: qs[1],
                    theta: params[0],
                },
                _ => unreachable!(),
            };
            if let RawGate::Cx { control, target }
            | RawGate::Cz { control, target }
            | RawGate::Cp {
                control, target, ..
            } = gate
            {
                if control == target {
                    return Err(QasmError {
                        line: gate_line,
                        kind: QasmErrorKind::Syntax(format!(
                            "two-qubit gate on a single qubit q[{control}]"
                        )),
                    });
                }
            }
            self.gates.push(gate);
        }
        Ok(())
    }

    /// `name[idx]` gives Some(idx); a bare register name gives None
    /// (broadcast).
    fn qubit_arg(&mut self) -> Result<Option<u32>, QasmError> {
        let reg = match self.next() {
            Some(Tok::Ident(r)) => r,
            other => return Err(self.syntax(format!("expected qubit argument, got {other:?}"))),
        };
        if Some(&reg) != self.reg_name.as_ref() {
            return Err(self.syntax(format!("unknown register `{reg}`")));
        }
        if self.peek() == Some(&Tok::Sym('[')) {
            self.next();
            let idx = match self.next() {
                Some(Tok::Number(v)) if v >= 0.0 && v.fract() == 0.0 => v as u32,
                _ => return Err(self.syntax("expected qubit index")),
            };
            self.expect_sym(']')?;
            Ok(Some(idx))
        } else {
            Ok(None)
        }
    }

    // parameter expressions: + - * / unary minus, parentheses, pi
    fn expr(&mut self) -> Result<f64, QasmError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Sym('+')) => {
                    self.next();
                    acc += self.term()?;
                }
                Some(Tok::Sym('-')) => {
                    self.next();
                    acc -= self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<f64, QasmError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Sym('*')) => {
                    self.next();
                    acc *= self.unary()?;
                }
                Some(Tok::Sym('/')) => {
                    self.next();
                    acc /= self.unary()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<f64, QasmError> {
        match self.next() {
            Some(Tok::Sym('-')) => Ok(-self.unary()?),
            Some(Tok::Number(v)) => Ok(v),
            Some(Tok::Ident(id)) if id == "pi" => Ok(std::f64::consts::PI),
            Some(Tok::Sym('(')) => {
                let v = self.expr()?;
                self.expect_sym(')')?;
                Ok(v)
            }
            Some(Tok::Ident(id)) => Err(self.err(QasmErrorKind::Unsupported(format!(
                "identifier `{id}` in parameter expression"
            )))),
            other => Err(self.syntax(format!("bad parameter expression, got {other:?}"))),
        }
    }
}
