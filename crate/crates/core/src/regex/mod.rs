//! The restricted regular-expression dialect.
//!
//! Expressions are built from literals, character classes, a fixed set of
//! shorthand macros, concatenation, disjunction and the postfix quantifiers
//! `*`, `+`, `?`, `{n}` and `{l,u}`. The grammar is documented in
//! `docs/grammar.md`.
//!
//! Two expressions are considered equal when their canonical printed forms
//! are equal; [`Regex::to_string`] produces that form.

mod charset;
mod parse;
mod print;
mod syntax;

pub use charset::{in_alphabet, Shorthand};
pub use parse::{parse_regex, ParseError, ParseErrorKind};
pub use print::print_regex;
pub use syntax::{subexpression_pool, NodeId, Pool, SyntaxNode, SyntaxTree};

use std::fmt;

/// A node of the expression AST.
///
/// The canonical form keeps `Concat` and `Alt` with at least two children;
/// the parser never produces anything else.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Regex {
    Concat(Vec<Regex>),
    Alt(Vec<Regex>),
    Class(Vec<ClassItem>),
    Star(Box<Regex>),
    Plus(Box<Regex>),
    Optional(Box<Regex>),
    /// `{n}`
    Repeat(Box<Regex>, u32),
    /// `{lo,hi}` with `lo <= hi`
    RepeatRange(Box<Regex>, u32, u32),
    Literal(char),
    /// A bare shorthand outside brackets: `\d`, `\w`, `\S`, `\e` or `.`.
    Macro(Shorthand),
    Epsilon,
}

/// One entry between square brackets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClassItem {
    Char(char),
    Range(char, char),
    /// A shorthand inside brackets, e.g. `[\d_]`. `Shorthand::Any` is not
    /// expressible here (`.` inside brackets is a literal dot).
    Macro(Shorthand),
}

impl ClassItem {
    pub fn contains(&self, c: char) -> bool {
        match *self {
            ClassItem::Char(x) => x == c,
            ClassItem::Range(lo, hi) => lo <= c && c <= hi,
            ClassItem::Macro(m) => m.contains(c),
        }
    }
}

impl Regex {
    /// A constant string as an expression: `Epsilon`, a single `Literal`,
    /// or a concatenation of literals.
    pub fn literal_str(s: &str) -> Regex {
        let mut chars: Vec<Regex> = s.chars().map(Regex::Literal).collect();
        match chars.len() {
            0 => Regex::Epsilon,
            1 => chars.pop().unwrap(),
            _ => Regex::Concat(chars),
        }
    }

    /// Builds a concatenation, collapsing zero or one children.
    pub fn concat(mut children: Vec<Regex>) -> Regex {
        match children.len() {
            0 => Regex::Epsilon,
            1 => children.pop().unwrap(),
            _ => Regex::Concat(children),
        }
    }

    /// Builds a disjunction, collapsing a single alternative.
    pub fn alt(mut children: Vec<Regex>) -> Regex {
        match children.len() {
            0 => Regex::Epsilon,
            1 => children.pop().unwrap(),
            _ => Regex::Alt(children),
        }
    }

    /// True for `Class` and `Macro` nodes: expressions that generate exactly
    /// one character from a set.
    pub fn is_char_set(&self) -> bool {
        matches!(self, Regex::Class(_) | Regex::Macro(_))
    }

    /// Membership of a single character for `Class`, `Macro` and `Literal`.
    pub fn char_matches(&self, c: char) -> bool {
        match self {
            Regex::Class(items) => items.iter().any(|it| it.contains(c)),
            Regex::Macro(m) => m.contains(c),
            Regex::Literal(x) => *x == c,
            _ => false,
        }
    }

    /// Direct sub-expressions in argument order. Class items are not
    /// included; see [`SyntaxTree`] for how they become nodes.
    pub fn children(&self) -> &[Regex] {
        match self {
            Regex::Concat(c) | Regex::Alt(c) => c,
            Regex::Star(c)
            | Regex::Plus(c)
            | Regex::Optional(c)
            | Regex::Repeat(c, _)
            | Regex::RepeatRange(c, _, _) => std::slice::from_ref(c.as_ref()),
            _ => &[],
        }
    }
}

impl fmt::Display for Regex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_regex(self))
    }
}

impl std::str::FromStr for Regex {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_regex(s)
    }
}
