//! Access-policy formulas: parsing, the threshold-tree form, and qualified
//! set evaluation.
//!
//! Grammar (`&` binds tighter than `|`, both left-associative):
//!
//! ```text
//! expr  := term ('|' term)*
//! term  := atom ('&' atom)*
//! atom  := ATTR | '(' expr ')' | INT 'of' '(' expr (',' expr)* ')'
//! ATTR  := [A-Za-z0-9_]+
//! ```
//!
//! `a & b` is threshold 2-of-2 and `a | b` is 1-of-2.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PolicyError {
    #[error("syntax error at offset {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("threshold {t} of {k} out of range at offset {position}")]
    ThresholdOutOfRange { t: usize, k: usize, position: usize },
}

fn syntax(position: usize, message: impl Into<String>) -> PolicyError {
    PolicyError::Syntax {
        position,
        message: message.into(),
    }
}

/// Attribute name: a nonempty token of letters, digits and underscores.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AttributeId(String);

impl AttributeId {
    pub fn new(name: &str) -> Option<AttributeId> {
        if !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            Some(AttributeId(name.to_string()))
        } else {
            None
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AttributeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for AttributeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AttributeId({})", self.0)
    }
}

/// A threshold-formula tree. `Threshold { t, children }` is satisfied when
/// at least `t` children are satisfied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PolicyNode {
    Leaf(AttributeId),
    Threshold { t: usize, children: Vec<PolicyNode> },
}

impl PolicyNode {
    pub fn leaf(name: &str) -> PolicyNode {
        PolicyNode::Leaf(AttributeId::new(name).expect("invalid attribute name"))
    }

    pub fn and(left: PolicyNode, right: PolicyNode) -> PolicyNode {
        PolicyNode::Threshold {
            t: 2,
            children: vec![left, right],
        }
    }

    pub fn or(left: PolicyNode, right: PolicyNode) -> PolicyNode {
        PolicyNode::Threshold {
            t: 1,
            children: vec![left, right],
        }
    }

    /// Leaf attributes in left-to-right occurrence order (with repeats).
    pub fn leaves(&self) -> Vec<AttributeId> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<AttributeId>) {
        match self {
            PolicyNode::Leaf(attr) => out.push(attr.clone()),
            PolicyNode::Threshold { children, .. } => {
                for child in children {
                    child.collect_leaves(out);
                }
            }
        }
    }

    /// Recursive threshold evaluation. Monotone: supersets of a satisfying
    /// set also satisfy.
    pub fn is_qualified(&self, attrs: &BTreeSet<AttributeId>) -> bool {
        match self {
            PolicyNode::Leaf(attr) => attrs.contains(attr),
            PolicyNode::Threshold { t, children } => {
                children.iter().filter(|c| c.is_qualified(attrs)).count() >= *t
            }
        }
    }

    /// Largest threshold value anywhere in the tree.
    pub fn max_threshold(&self) -> usize {
        match self {
            PolicyNode::Leaf(_) => 1,
            PolicyNode::Threshold { t, children } => children
                .iter()
                .map(|c| c.max_threshold())
                .max()
                .unwrap_or(1)
                .max(*t),
        }
    }
}

impl fmt::Display for PolicyNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicyNode::Leaf(attr) => write!(f, "{attr}"),
            PolicyNode::Threshold { t, children } => {
                write!(f, "{t} of (")?;
                for (i, child) in children.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{child}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Ident(String),
    And,
    Or,
    LParen,
    RParen,
    Comma,
}

struct Lexer {
    tokens: Vec<(Token, usize)>,
    pos: usize,
    end: usize,
}

impl Lexer {
    fn tokenize(text: &str) -> Result<Lexer, PolicyError> {
        let mut tokens = Vec::new();
        let bytes = text.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i] as char;
            match c {
                ' ' | '\t' | '\n' | '\r' => i += 1,
                '&' => {
                    tokens.push((Token::And, i));
                    i += 1;
                }
                '|' => {
                    tokens.push((Token::Or, i));
                    i += 1;
                }
                '(' => {
                    tokens.push((Token::LParen, i));
                    i += 1;
                }
                ')' => {
                    tokens.push((Token::RParen, i));
                    i += 1;
                }
                ',' => {
                    tokens.push((Token::Comma, i));
                    i += 1;
                }
                c if c.is_ascii_alphanumeric() || c == '_' => {
                    let start = i;
                    while i < bytes.len()
                        && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                    {
                        i += 1;
                    }
                    tokens.push((Token::Ident(text[start..i].to_string()), start));
                }
                other => return Err(syntax(i, format!("unexpected character {other:?}"))),
            }
        }
        Ok(Lexer {
            tokens,
            pos: 0,
            end: text.len(),
        })
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn peek_at(&self, offset: usize) -> Option<&Token> {
        self.tokens.get(self.pos + offset).map(|(t, _)| t)
    }

    fn position(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|(_, p)| *p)
            .unwrap_or(self.end)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: &Token, what: &str) -> Result<(), PolicyError> {
        let position = self.position();
        match self.next() {
            Some(ref t) if t == want => Ok(()),
            _ => Err(syntax(position, format!("expected {what}"))),
        }
    }
}

/// Parses a policy formula into its threshold tree.
pub fn parse_policy(text: &str) -> Result<PolicyNode, PolicyError> {
    if text.trim().is_empty() {
        return Err(syntax(0, "empty policy"));
    }
    let mut lexer = Lexer::tokenize(text)?;
    let node = parse_or(&mut lexer)?;
    if lexer.peek().is_some() {
        return Err(syntax(lexer.position(), "unexpected trailing input"));
    }
    Ok(node)
}

fn parse_or(lx: &mut Lexer) -> Result<PolicyNode, PolicyError> {
    let mut node = parse_and(lx)?;
    while lx.peek() == Some(&Token::Or) {
        lx.next();
        let rhs = parse_and(lx)?;
        node = PolicyNode::or(node, rhs);
    }
    Ok(node)
}

fn parse_and(lx: &mut Lexer) -> Result<PolicyNode, PolicyError> {
    let mut node = parse_atom(lx)?;
    while lx.peek() == Some(&Token::And) {
        lx.next();
        let rhs = parse_atom(lx)?;
        node = PolicyNode::and(node, rhs);
    }
    Ok(node)
}

fn parse_atom(lx: &mut Lexer) -> Result<PolicyNode, PolicyError> {
    let position = lx.position();
    match lx.peek() {
        Some(Token::LParen) => {
            lx.next();
            let node = parse_or(lx)?;
            lx.expect(&Token::RParen, "closing ')'")?;
            Ok(node)
        }
        Some(Token::Ident(name)) => {
            // "<count> of ( ... )" needs two tokens of lookahead to keep
            // purely numeric attribute names unambiguous
            let is_threshold = name.chars().all(|c| c.is_ascii_digit())
                && matches!(lx.peek_at(1), Some(Token::Ident(kw)) if kw == "of")
                && matches!(lx.peek_at(2), Some(Token::LParen));
            if is_threshold {
                parse_threshold(lx, position)
            } else {
                let name = name.clone();
                lx.next();
                AttributeId::new(&name)
                    .map(PolicyNode::Leaf)
                    .ok_or_else(|| syntax(position, format!("invalid attribute name {name:?}")))
            }
        }
        _ => Err(syntax(position, "expected attribute, '(' or threshold")),
    }
}

fn parse_threshold(lx: &mut Lexer, position: usize) -> Result<PolicyNode, PolicyError> {
    let t: usize = match lx.next() {
        Some(Token::Ident(digits)) => digits
            .parse()
            .map_err(|_| syntax(position, "threshold count out of range"))?,
        _ => unreachable!("caller checked the lookahead"),
    };
    lx.next(); // 'of'
    lx.expect(&Token::LParen, "'(' after 'of'")?;
    let mut children = vec![parse_or(lx)?];
    while lx.peek() == Some(&Token::Comma) {
        lx.next();
        children.push(parse_or(lx)?);
    }
    lx.expect(&Token::RParen, "closing ')'")?;
    if t < 1 || t > children.len() {
        return Err(PolicyError::ThresholdOutOfRange {
            t,
            k: children.len(),
            position,
        });
    }
    Ok(PolicyNode::Threshold { t, children })
}
