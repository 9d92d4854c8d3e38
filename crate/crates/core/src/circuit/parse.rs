use thiserror::Error;

use super::{check_instruction, Circuit, Instruction, Item, Opcode, Target};
use crate::pauli::Axis;

/// Syntax or per-instruction error, with 1-based line and column.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

fn err(line: usize, column: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        column,
        message: message.into(),
    }
}

struct Frame {
    count: u64,
    body: Circuit,
    line: usize,
}

pub(super) fn parse(text: &str) -> Result<Circuit, ParseError> {
    let mut stack: Vec<Frame> = vec![Frame {
        count: 1,
        body: Circuit::new(),
        line: 0,
    }];
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = match raw.find('#') {
            Some(k) => &raw[..k],
            None => raw,
        };
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = content.len() - content.trim_start().len();
        if trimmed == "}" {
            if stack.len() == 1 {
                return Err(err(line_no, indent + 1, "unmatched '}'"));
            }
            let frame = stack.pop().unwrap();
            stack.last_mut().unwrap().body.items.push(Item::Repeat {
                count: frame.count,
                body: frame.body,
            });
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("REPEAT") {
            let rest = rest.trim();
            let Some(num) = rest.strip_suffix('{') else {
                return Err(err(line_no, indent + 1, "REPEAT line must end with '{'"));
            };
            let count: u64 = num
                .trim()
                .parse()
                .map_err(|_| err(line_no, indent + 8, format!("bad repeat count '{}'", num.trim())))?;
            if count == 0 {
                return Err(err(line_no, indent + 8, "repeat count must be positive"));
            }
            stack.push(Frame {
                count,
                body: Circuit::new(),
                line: line_no,
            });
            continue;
        }
        let ins = parse_instruction(content, line_no)?;
        stack.last_mut().unwrap().body.push(ins);
    }
    if stack.len() > 1 {
        let open = stack.last().unwrap().line;
        return Err(err(open, 1, "REPEAT block is never closed"));
    }
    Ok(stack.pop().unwrap().body)
}

fn parse_instruction(line: &str, line_no: usize) -> Result<Instruction, ParseError> {
    let start = line.len() - line.trim_start().len();
    let body = &line[start..];
    let name_len = body
        .find(|c: char| c == '(' || c.is_whitespace())
        .unwrap_or(body.len());
    let name = &body[..name_len];
    let op = Opcode::from_name(name).ok_or_else(|| err(line_no, start + 1, format!("unknown instruction '{name}'")))?;
    let mut pos = start + name_len;
    let mut args = Vec::new();
    if line[pos..].starts_with('(') {
        let close = line[pos..]
            .find(')')
            .ok_or_else(|| err(line_no, pos + 1, "unclosed argument list"))?;
        let inner = &line[pos + 1..pos + close];
        let mut offset = pos + 1;
        for piece in inner.split(',') {
            let t = piece.trim();
            let col = offset + (piece.len() - piece.trim_start().len()) + 1;
            let v: f64 = t.parse().map_err(|_| err(line_no, col, format!("bad argument '{t}'")))?;
            args.push(v);
            offset += piece.len() + 1;
        }
        pos += close + 1;
    }
    let mut targets = Vec::new();
    let mut cursor = pos;
    let rest = &line[pos..];
    if !rest.is_empty() && !rest.starts_with(char::is_whitespace) {
        return Err(err(line_no, pos + 1, "expected whitespace before targets"));
    }
    for token in rest.split_whitespace() {
        let col = line[cursor..].find(token).unwrap() + cursor + 1;
        cursor = col - 1 + token.len();
        targets.push(parse_target(op, token).map_err(|m| err(line_no, col, m))?);
    }
    let ins = Instruction { op, args, targets };
    check_instruction(&ins).map_err(|v| err(line_no, start + 1, v.to_string()))?;
    Ok(ins)
}

fn parse_target(op: Opcode, token: &str) -> Result<Target, String> {
    if let Some(inner) = token.strip_prefix("rec[-").and_then(|s| s.strip_suffix(']')) {
        let k: u32 = inner.parse().map_err(|_| format!("bad record target '{token}'"))?;
        if k == 0 {
            return Err("record lookback must be at least 1".into());
        }
        return Ok(Target::Rec(k));
    }
    if token.chars().all(|c| c.is_ascii_digit()) {
        let q: u32 = token.parse().map_err(|_| format!("bad qubit '{token}'"))?;
        return Ok(Target::Qubit(q));
    }
    if matches!(op, Opcode::Mpp | Opcode::CorrelatedMeasError) {
        let mut terms = Vec::new();
        for part in token.split('*') {
            let mut chars = part.chars();
            let axis = chars
                .next()
                .and_then(Axis::from_letter)
                .ok_or_else(|| format!("bad Pauli term '{part}'"))?;
            let q: u32 = chars.as_str().parse().map_err(|_| format!("bad Pauli term '{part}'"))?;
            terms.push((axis, q));
        }
        return Ok(Target::Product(terms));
    }
    Err(format!("bad target '{token}'"))
}
