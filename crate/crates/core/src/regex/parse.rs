use std::fmt;

use super::{ClassItem, Regex, Shorthand};

/// A syntax error, with the byte offset into the input where it was found.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{kind} at byte {offset}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnbalancedParen,
    UnclosedClass,
    EmptyClass,
    EmptyDisjunct,
    BadRepetition,
    /// `{lo,hi}` with `lo > hi`
    BoundsOrder { lo: u32, hi: u32 },
    BadRange { lo: char, hi: char },
    UnknownEscape(char),
    TrailingBackslash,
    MissingOperand(char),
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::UnbalancedParen => write!(f, "unbalanced parenthesis"),
            ParseErrorKind::UnclosedClass => write!(f, "unclosed character class"),
            ParseErrorKind::EmptyClass => write!(f, "empty character class"),
            ParseErrorKind::EmptyDisjunct => write!(f, "empty disjunct"),
            ParseErrorKind::BadRepetition => write!(f, "malformed repetition"),
            ParseErrorKind::BoundsOrder { lo, hi } => {
                write!(f, "repetition lower bound {lo} exceeds upper bound {hi}")
            }
            ParseErrorKind::BadRange { lo, hi } => write!(f, "invalid range {lo:?}-{hi:?}"),
            ParseErrorKind::UnknownEscape(c) => write!(f, "unknown escape \\{c}"),
            ParseErrorKind::TrailingBackslash => write!(f, "trailing backslash"),
            ParseErrorKind::MissingOperand(c) => write!(f, "quantifier {c:?} has no operand"),
        }
    }
}

/// Parses dialect text into an AST. The empty string parses to `Epsilon`.
pub fn parse_regex(text: &str) -> Result<Regex, ParseError> {
    let mut p = Parser {
        chars: text.char_indices().collect(),
        pos: 0,
        len: text.len(),
    };
    let r = p.alternation()?;
    if p.pos < p.chars.len() {
        // only a stray ')' stops the top-level alternation early
        return Err(p.err(ParseErrorKind::UnbalancedParen));
    }
    Ok(r)
}

struct Parser {
    chars: Vec<(usize, char)>,
    pos: usize,
    len: usize,
}

/// Escapes that denote a literal character.
fn escaped_literal(c: char) -> Option<char> {
    match c {
        't' => Some('\t'),
        'n' => Some('\n'),
        'r' => Some('\r'),
        c if c.is_ascii_punctuation() => Some(c),
        ' ' => Some(' '),
        _ => None,
    }
}

impl Parser {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn offset(&self) -> usize {
        self.chars.get(self.pos).map_or(self.len, |&(o, _)| o)
    }

    fn err(&self, kind: ParseErrorKind) -> ParseError {
        ParseError {
            offset: self.offset(),
            kind,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn alternation(&mut self) -> Result<Regex, ParseError> {
        let start = self.offset();
        let mut branches = vec![self.sequence()?];
        while self.peek() == Some('|') {
            self.bump();
            branches.push(self.sequence()?);
        }
        if branches.len() == 1 {
            return Ok(branches.pop().unwrap().unwrap_or(Regex::Epsilon));
        }
        let mut out = Vec::with_capacity(branches.len());
        for b in branches {
            match b {
                Some(r) => out.push(r),
                None => {
                    return Err(ParseError {
                        offset: start,
                        kind: ParseErrorKind::EmptyDisjunct,
                    })
                }
            }
        }
        Ok(Regex::Alt(out))
    }

    /// `None` when the sequence is empty (no units at all).
    fn sequence(&mut self) -> Result<Option<Regex>, ParseError> {
        let mut units = Vec::new();
        while let Some(c) = self.peek() {
            if c == '|' || c == ')' {
                break;
            }
            units.push(self.quantified()?);
        }
        Ok(match units.len() {
            0 => None,
            1 => units.pop(),
            _ => Some(Regex::Concat(units)),
        })
    }

    fn quantified(&mut self) -> Result<Regex, ParseError> {
        if let Some(c @ ('*' | '+' | '?')) = self.peek() {
            return Err(self.err(ParseErrorKind::MissingOperand(c)));
        }
        if self.peek() == Some('{') {
            return Err(self.err(ParseErrorKind::MissingOperand('{')));
        }
        let mut r = self.atom()?;
        loop {
            r = match self.peek() {
                Some('*') => {
                    self.bump();
                    Regex::Star(Box::new(r))
                }
                Some('+') => {
                    self.bump();
                    Regex::Plus(Box::new(r))
                }
                Some('?') => {
                    self.bump();
                    Regex::Optional(Box::new(r))
                }
                Some('{') => self.bounds(r)?,
                _ => return Ok(r),
            };
        }
    }

    fn number(&mut self) -> Option<u32> {
        let start = self.pos;
        let mut v: u32 = 0;
        while let Some(c) = self.peek() {
            let Some(d) = c.to_digit(10) else { break };
            v = v.checked_mul(10)?.checked_add(d)?;
            self.bump();
        }
        (self.pos > start).then_some(v)
    }

    fn bounds(&mut self, r: Regex) -> Result<Regex, ParseError> {
        let open = self.offset();
        let bad = ParseError {
            offset: open,
            kind: ParseErrorKind::BadRepetition,
        };
        self.bump();
        let lo = self.number().ok_or_else(|| bad.clone())?;
        match self.bump() {
            Some('}') => Ok(Regex::Repeat(Box::new(r), lo)),
            Some(',') => {
                let hi = self.number().ok_or_else(|| bad.clone())?;
                if self.bump() != Some('}') {
                    return Err(bad);
                }
                if lo > hi {
                    return Err(ParseError {
                        offset: open,
                        kind: ParseErrorKind::BoundsOrder { lo, hi },
                    });
                }
                Ok(Regex::RepeatRange(Box::new(r), lo, hi))
            }
            _ => Err(bad),
        }
    }

    fn atom(&mut self) -> Result<Regex, ParseError> {
        let c = self.peek().expect("atom called at end of input");
        match c {
            '(' => {
                let open = self.offset();
                self.bump();
                let inner = self.alternation()?;
                if self.bump() != Some(')') {
                    return Err(ParseError {
                        offset: open,
                        kind: ParseErrorKind::UnbalancedParen,
                    });
                }
                Ok(inner)
            }
            '[' => self.class(),
            '.' => {
                self.bump();
                Ok(Regex::Macro(Shorthand::Any))
            }
            '\\' => {
                self.bump();
                let Some(e) = self.peek() else {
                    return Err(self.err(ParseErrorKind::TrailingBackslash));
                };
                if let Some(m) = Shorthand::from_escape(e) {
                    self.bump();
                    return Ok(Regex::Macro(m));
                }
                match escaped_literal(e) {
                    Some(l) => {
                        self.bump();
                        Ok(Regex::Literal(l))
                    }
                    None => Err(self.err(ParseErrorKind::UnknownEscape(e))),
                }
            }
            ']' | '}' => {
                // closing brackets are literals only when escaped
                Err(self.err(ParseErrorKind::UnknownEscape(c)))
            }
            _ => {
                self.bump();
                Ok(Regex::Literal(c))
            }
        }
    }

    fn class_char(&mut self) -> Result<ClassChar, ParseError> {
        match self.bump() {
            None => Err(self.err(ParseErrorKind::UnclosedClass)),
            Some('\\') => {
                let Some(e) = self.peek() else {
                    return Err(self.err(ParseErrorKind::UnclosedClass));
                };
                if let Some(m) = Shorthand::from_escape(e) {
                    self.bump();
                    return Ok(ClassChar::Macro(m));
                }
                match escaped_literal(e) {
                    Some(l) => {
                        self.bump();
                        Ok(ClassChar::Char(l))
                    }
                    None => Err(self.err(ParseErrorKind::UnknownEscape(e))),
                }
            }
            Some(c) => Ok(ClassChar::Char(c)),
        }
    }

    fn class(&mut self) -> Result<Regex, ParseError> {
        let open = self.offset();
        self.bump();
        let mut items = Vec::new();
        loop {
            match self.peek() {
                None => {
                    return Err(ParseError {
                        offset: open,
                        kind: ParseErrorKind::UnclosedClass,
                    })
                }
                Some(']') => {
                    self.bump();
                    break;
                }
                Some('[') => return Err(self.err(ParseErrorKind::UnknownEscape('['))),
                _ => {}
            }
            let item_at = self.offset();
            let first = self.class_char()?;
            let is_range = self.peek() == Some('-')
                && self.chars.get(self.pos + 1).is_some_and(|&(_, c)| c != ']');
            match (first, is_range) {
                (ClassChar::Char(lo), true) => {
                    self.bump();
                    let hi = match self.class_char()? {
                        ClassChar::Char(h) => h,
                        ClassChar::Macro(_) => {
                            return Err(ParseError {
                                offset: item_at,
                                kind: ParseErrorKind::BadRange { lo, hi: '\\' },
                            })
                        }
                    };
                    if lo > hi {
                        return Err(ParseError {
                            offset: item_at,
                            kind: ParseErrorKind::BadRange { lo, hi },
                        });
                    }
                    items.push(ClassItem::Range(lo, hi));
                }
                (ClassChar::Char(c), false) => items.push(ClassItem::Char(c)),
                (ClassChar::Macro(m), _) => items.push(ClassItem::Macro(m)),
            }
        }
        if items.is_empty() {
            return Err(ParseError {
                offset: open,
                kind: ParseErrorKind::EmptyClass,
            });
        }
        Ok(Regex::Class(items))
    }
}

enum ClassChar {
    Char(char),
    Macro(Shorthand),
}
