//! Line-oriented circuit text format.
//!
//! ```text
//! # comment
//! qubits 4
//! params 2
//! H 0
//! NH 0 1 p0
//! RZ 2 -0.5*p1+0.25
//! RY 3 1.2
//! ```

use std::fmt::Write;

use super::{Angle, Circuit, GateKind, GateOp, ParamExpr};
use crate::{Error, Result};

fn fmt_angle(angle: &Angle) -> String {
    match angle {
        Angle::Fixed(a) => format!("{a}"),
        Angle::Param(p) => {
            let mut s = if p.coefficient == 1.0 {
                format!("p{}", p.index)
            } else if p.coefficient == -1.0 {
                format!("-p{}", p.index)
            } else {
                format!("{}*p{}", p.coefficient, p.index)
            };
            if p.offset > 0.0 {
                let _ = write!(s, "+{}", p.offset);
            } else if p.offset < 0.0 {
                let _ = write!(s, "{}", p.offset);
            }
            s
        }
    }
}

pub(super) fn to_text(c: &Circuit) -> String {
    let mut out = format!("qubits {}\nparams {}\n", c.n_qubits, c.n_params);
    for op in &c.ops {
        out.push_str(op.kind.name());
        for t in &op.targets {
            let _ = write!(out, " {t}");
        }
        if let Some(a) = &op.angle {
            out.push(' ');
            out.push_str(&fmt_angle(a));
        }
        out.push('\n');
    }
    out
}

fn parse_float(s: &str, line: usize) -> Result<f64> {
    s.parse::<f64>().map_err(|_| Error::Parse {
        line,
        message: format!("invalid number `{s}`"),
    })
}

fn parse_angle(s: &str, line: usize) -> Result<Angle> {
    let Some(p_pos) = s.find('p') else {
        return parse_float(s, line).map(Angle::Fixed);
    };
    let coefficient = match &s[..p_pos] {
        "" | "+" => 1.0,
        "-" => -1.0,
        prefix => {
            let c = prefix.strip_suffix('*').ok_or_else(|| Error::Parse {
                line,
                message: format!("expected `*` before parameter in `{s}`"),
            })?;
            parse_float(c, line)?
        }
    };
    if coefficient == 0.0 {
        return Err(Error::Parse {
            line,
            message: "parameter coefficient must be non-zero".into(),
        });
    }
    let rest = &s[p_pos + 1..];
    let digits = rest.find(['+', '-']).unwrap_or(rest.len());
    let index = rest[..digits].parse::<usize>().map_err(|_| Error::Parse {
        line,
        message: format!("invalid parameter index in `{s}`"),
    })?;
    let offset = if digits < rest.len() {
        parse_float(&rest[digits..], line)?
    } else {
        0.0
    };
    Ok(Angle::Param(ParamExpr {
        index,
        coefficient,
        offset,
    }))
}

/// Parse the text format produced by [`Circuit::to_text`].
pub fn parse_circuit(text: &str) -> Result<Circuit> {
    let mut n_qubits = None;
    let mut n_params = 0usize;
    let mut ops = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        match fields[0] {
            "qubits" | "params" => {
                let value = fields
                    .get(1)
                    .and_then(|v| v.parse::<usize>().ok())
                    .ok_or_else(|| Error::Parse {
                        line,
                        message: format!("`{}` needs a non-negative integer", fields[0]),
                    })?;
                if fields[0] == "qubits" {
                    n_qubits = Some(value);
                } else {
                    n_params = value;
                }
            }
            name => {
                let kind = GateKind::from_name(&name.to_ascii_uppercase()).ok_or_else(|| {
                    Error::Parse {
                        line,
                        message: format!("unknown gate `{name}`"),
                    }
                })?;
                let arity = kind.arity();
                let expected = arity + usize::from(kind.is_parametric());
                if fields.len() - 1 != expected {
                    return Err(Error::Parse {
                        line,
                        message: format!(
                            "{} takes {} field(s), got {}",
                            kind.name(),
                            expected,
                            fields.len() - 1
                        ),
                    });
                }
                let targets = fields[1..=arity]
                    .iter()
                    .map(|f| {
                        f.parse::<usize>().map_err(|_| Error::Parse {
                            line,
                            message: format!("invalid qubit `{f}`"),
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                let angle = if kind.is_parametric() {
                    Some(parse_angle(fields[arity + 1], line)?)
                } else {
                    None
                };
                ops.push((line, GateOp { kind, targets, angle }));
            }
        }
    }
    let n_qubits = n_qubits.ok_or(Error::Parse {
        line: 0,
        message: "missing `qubits` header".into(),
    })?;
    let mut circuit = Circuit::new(n_qubits, n_params);
    for (line, op) in ops {
        circuit.push(op).map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
    }
    Ok(circuit)
}
