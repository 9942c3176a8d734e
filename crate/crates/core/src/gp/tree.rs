//! Expression trees over feature terminals.

use std::fmt;
use std::str::FromStr;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::matrix::Matrix;

/// Denominators smaller than this in magnitude make `pdiv` return 1.
pub const PDIV_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    Add,
    Sub,
    Mul,
    PDiv,
    Max,
    Min,
    Abs,
    Neg,
    Sigmoid,
    Relu,
}

impl Op {
    pub const ALL: [Op; 10] = [
        Op::Add,
        Op::Sub,
        Op::Mul,
        Op::PDiv,
        Op::Max,
        Op::Min,
        Op::Abs,
        Op::Neg,
        Op::Sigmoid,
        Op::Relu,
    ];

    pub fn arity(self) -> usize {
        match self {
            Op::Add | Op::Sub | Op::Mul | Op::PDiv | Op::Max | Op::Min => 2,
            Op::Abs | Op::Neg | Op::Sigmoid | Op::Relu => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Op::Add => "add",
            Op::Sub => "sub",
            Op::Mul => "mul",
            Op::PDiv => "pdiv",
            Op::Max => "max",
            Op::Min => "min",
            Op::Abs => "abs",
            Op::Neg => "neg",
            Op::Sigmoid => "sigmoid",
            Op::Relu => "relu",
        }
    }

    #[inline]
    pub fn apply_binary(self, a: f64, b: f64) -> f64 {
        let v = match self {
            Op::Add => a + b,
            Op::Sub => a - b,
            Op::Mul => a * b,
            Op::PDiv => {
                if b.abs() < PDIV_EPSILON {
                    1.0
                } else {
                    a / b
                }
            }
            Op::Max => a.max(b),
            Op::Min => a.min(b),
            _ => unreachable!("{} is unary", self.name()),
        };
        finite_or_zero(v)
    }

    #[inline]
    pub fn apply_unary(self, a: f64) -> f64 {
        let v = match self {
            Op::Abs => a.abs(),
            Op::Neg => -a,
            Op::Sigmoid => 1.0 / (1.0 + (-a).exp()),
            Op::Relu => a.max(0.0),
            _ => unreachable!("{} is binary", self.name()),
        };
        finite_or_zero(v)
    }
}

// Deep chains of mul/pdiv can still overflow; such values collapse to 0.
#[inline]
fn finite_or_zero(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        0.0
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Op {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Op::ALL
            .into_iter()
            .find(|op| op.name() == s)
            .ok_or_else(|| ParseError::UnknownOperator(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Feature(usize),
    Call(Op, Vec<Node>),
}

impl Node {
    pub fn unary(op: Op, child: Node) -> Self {
        debug_assert_eq!(op.arity(), 1);
        Node::Call(op, vec![child])
    }

    pub fn binary(op: Op, left: Node, right: Node) -> Self {
        debug_assert_eq!(op.arity(), 2);
        Node::Call(op, vec![left, right])
    }

    /// Evaluates the tree on a single row of feature values.
    pub fn eval(&self, row: &[f64]) -> f64 {
        match self {
            Node::Feature(i) => row[*i],
            Node::Call(op, children) => match children.as_slice() {
                [a] => op.apply_unary(a.eval(row)),
                [a, b] => op.apply_binary(a.eval(row), b.eval(row)),
                _ => unreachable!("invalid arity"),
            },
        }
    }

    /// Evaluates the tree for every row at once, node by node.
    pub fn eval_rows(&self, data: &Matrix) -> Vec<f64> {
        match self {
            Node::Feature(i) => data.column(*i),
            Node::Call(op, children) => match children.as_slice() {
                [a] => {
                    let mut v = a.eval_rows(data);
                    v.iter_mut().for_each(|x| *x = op.apply_unary(*x));
                    v
                }
                [a, b] => {
                    let mut left = a.eval_rows(data);
                    let right = b.eval_rows(data);
                    left.iter_mut()
                        .zip(&right)
                        .for_each(|(x, &y)| *x = op.apply_binary(*x, y));
                    left
                }
                _ => unreachable!("invalid arity"),
            },
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self {
            Node::Feature(_) => 1,
            Node::Call(_, children) => 1 + children.iter().map(Node::size).sum::<usize>(),
        }
    }

    /// Height of the tree; a lone terminal has depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Node::Feature(_) => 0,
            Node::Call(_, children) => 1 + children.iter().map(Node::depth).max().unwrap_or(0),
        }
    }

    /// Checks arity and feature bounds.
    pub fn validate(&self, n_features: usize) -> Result<(), String> {
        match self {
            Node::Feature(i) if *i < n_features => Ok(()),
            Node::Feature(i) => Err(format!("feature index {i} out of range ({n_features})")),
            Node::Call(op, children) => {
                if children.len() != op.arity() {
                    return Err(format!(
                        "{op} expects {} children, got {}",
                        op.arity(),
                        children.len()
                    ));
                }
                children.iter().try_for_each(|c| c.validate(n_features))
            }
        }
    }

    /// Node at the given pre-order position.
    pub fn subtree(&self, index: usize) -> Option<&Node> {
        let mut remaining = index;
        self.find(&mut remaining)
    }

    fn find(&self, remaining: &mut usize) -> Option<&Node> {
        if *remaining == 0 {
            return Some(self);
        }
        *remaining -= 1;
        if let Node::Call(_, children) = self {
            for c in children {
                if let Some(n) = c.find(remaining) {
                    return Some(n);
                }
            }
        }
        None
    }

    /// Depth (distance from the root) of the node at a pre-order position.
    pub fn node_depth(&self, index: usize) -> Option<usize> {
        fn walk(node: &Node, remaining: &mut usize, level: usize) -> Option<usize> {
            if *remaining == 0 {
                return Some(level);
            }
            *remaining -= 1;
            if let Node::Call(_, children) = node {
                for c in children {
                    if let Some(d) = walk(c, remaining, level + 1) {
                        return Some(d);
                    }
                }
            }
            None
        }
        let mut remaining = index;
        walk(self, &mut remaining, 0)
    }

    /// Copy of the tree with the node at `index` replaced by `replacement`.
    pub fn replace(&self, index: usize, replacement: Node) -> Node {
        fn walk(node: &Node, remaining: &mut usize, replacement: &mut Option<Node>) -> Node {
            if *remaining == 0 {
                *remaining = usize::MAX;
                return replacement.take().expect("replacement used once");
            }
            if *remaining != usize::MAX {
                *remaining -= 1;
            }
            match node {
                Node::Feature(i) => Node::Feature(*i),
                Node::Call(op, children) => Node::Call(
                    *op,
                    children
                        .iter()
                        .map(|c| walk(c, remaining, replacement))
                        .collect(),
                ),
            }
        }
        let mut remaining = index;
        let mut slot = Some(replacement);
        let out = walk(self, &mut remaining, &mut slot);
        assert!(slot.is_none(), "index {index} outside tree");
        out
    }

    /// Feature indices in pre-order.
    pub fn features(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_features(&mut out);
        out
    }

    fn collect_features(&self, out: &mut Vec<usize>) {
        match self {
            Node::Feature(i) => out.push(*i),
            Node::Call(_, children) => children.iter().for_each(|c| c.collect_features(out)),
        }
    }

    /// Parenthesised prefix form, e.g. `(max (add f0 f1) f2)`. Terminals use
    /// `feature_names` when given, otherwise `f{index}`.
    pub fn render(&self, feature_names: Option<&[String]>) -> String {
        let mut out = String::new();
        self.render_into(feature_names, &mut out);
        out
    }

    fn render_into(&self, names: Option<&[String]>, out: &mut String) {
        match self {
            Node::Feature(i) => match names.and_then(|n| n.get(*i)) {
                Some(name) => push_atom(name, out),
                None => {
                    out.push('f');
                    out.push_str(&i.to_string());
                }
            },
            Node::Call(op, children) => {
                out.push('(');
                out.push_str(op.name());
                for c in children {
                    out.push(' ');
                    c.render_into(names, out);
                }
                out.push(')');
            }
        }
    }

    /// Parses the output of [`Node::render`].
    pub fn parse(text: &str, feature_names: Option<&[String]>) -> Result<Node, ParseError> {
        let tokens = tokenize(text)?;
        let mut pos = 0;
        let node = parse_node(&tokens, &mut pos, feature_names)?;
        if pos != tokens.len() {
            return Err(ParseError::TrailingInput);
        }
        Ok(node)
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(None))
    }
}

// Trees serialize as their index-based expression text.
impl Serialize for Node {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.render(None))
    }
}

impl<'de> Deserialize<'de> for Node {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        Node::parse(&text, None).map_err(D::Error::custom)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("unexpected end of expression")]
    UnexpectedEnd,
    #[error("unexpected ')'")]
    UnexpectedClose,
    #[error("unknown operator {0:?}")]
    UnknownOperator(String),
    #[error("unknown feature {0:?}")]
    UnknownFeature(String),
    #[error("{op} expects {expected} arguments, got {got}")]
    Arity {
        op: String,
        expected: usize,
        got: usize,
    },
    #[error("unterminated quoted name")]
    UnterminatedQuote,
    #[error("trailing input after expression")]
    TrailingInput,
}

fn needs_quoting(name: &str) -> bool {
    name.is_empty()
        || name
            .chars()
            .any(|c| c.is_whitespace() || c == '(' || c == ')' || c == '"')
}

fn push_atom(name: &str, out: &mut String) {
    if needs_quoting(name) {
        out.push('"');
        for c in name.chars() {
            if c == '"' || c == '\\' {
                out.push('\\');
            }
            out.push(c);
        }
        out.push('"');
    } else {
        out.push_str(name);
    }
}

#[derive(Debug, PartialEq)]
enum Token {
    Open,
    Close,
    Atom(String),
}

fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut tokens = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            '(' => {
                chars.next();
                tokens.push(Token::Open);
            }
            ')' => {
                chars.next();
                tokens.push(Token::Close);
            }
            c if c.is_whitespace() => {
                chars.next();
            }
            '"' => {
                chars.next();
                let mut atom = String::new();
                loop {
                    match chars.next() {
                        Some('\\') => atom.push(chars.next().ok_or(ParseError::UnterminatedQuote)?),
                        Some('"') => break,
                        Some(c) => atom.push(c),
                        None => return Err(ParseError::UnterminatedQuote),
                    }
                }
                tokens.push(Token::Atom(atom));
            }
            _ => {
                let mut atom = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' {
                        break;
                    }
                    atom.push(c);
                    chars.next();
                }
                tokens.push(Token::Atom(atom));
            }
        }
    }
    Ok(tokens)
}

fn resolve_feature(atom: &str, names: Option<&[String]>) -> Result<usize, ParseError> {
    if let Some(i) = names.and_then(|n| n.iter().position(|x| x == atom)) {
        return Ok(i);
    }
    atom.strip_prefix('f')
        .and_then(|digits| digits.parse::<usize>().ok())
        .filter(|&i| names.is_none_or(|n| i < n.len()))
        .ok_or_else(|| ParseError::UnknownFeature(atom.to_string()))
}

fn parse_node(
    tokens: &[Token],
    pos: &mut usize,
    names: Option<&[String]>,
) -> Result<Node, ParseError> {
    match tokens.get(*pos) {
        None => Err(ParseError::UnexpectedEnd),
        Some(Token::Close) => Err(ParseError::UnexpectedClose),
        Some(Token::Atom(a)) => {
            *pos += 1;
            Ok(Node::Feature(resolve_feature(a, names)?))
        }
        Some(Token::Open) => {
            *pos += 1;
            let op: Op = match tokens.get(*pos) {
                Some(Token::Atom(a)) => a.parse()?,
                Some(Token::Close) => return Err(ParseError::UnexpectedClose),
                _ => return Err(ParseError::UnexpectedEnd),
            };
            *pos += 1;
            let mut children = Vec::new();
            loop {
                match tokens.get(*pos) {
                    Some(Token::Close) => {
                        *pos += 1;
                        break;
                    }
                    Some(_) => children.push(parse_node(tokens, pos, names)?),
                    None => return Err(ParseError::UnexpectedEnd),
                }
            }
            if children.len() != op.arity() {
                return Err(ParseError::Arity {
                    op: op.name().to_string(),
                    expected: op.arity(),
                    got: children.len(),
                });
            }
            Ok(Node::Call(op, children))
        }
    }
}
