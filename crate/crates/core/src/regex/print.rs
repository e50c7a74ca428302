use super::{ClassItem, Regex};

const META: &str = "\\()[]{}|*+?.";
const CLASS_META: &str = "\\[]-^";

/// Canonical text of an expression.
///
/// Parentheses appear only where needed to keep the tree shape: around
/// disjunctions, around a concatenation nested in a concatenation, and
/// around compound quantifier operands. `Epsilon` prints as `""` at the top
/// level and as `()` anywhere else.
pub fn print_regex(r: &Regex) -> String {
    let mut out = String::new();
    if *r != Regex::Epsilon {
        write_node(r, &mut out);
    }
    out
}

fn push_escaped(c: char, meta: &str, out: &mut String) {
    match c {
        '\t' => out.push_str("\\t"),
        '\n' => out.push_str("\\n"),
        '\r' => out.push_str("\\r"),
        c if meta.contains(c) => {
            out.push('\\');
            out.push(c);
        }
        c => out.push(c),
    }
}

fn write_item(item: &ClassItem, out: &mut String) {
    match *item {
        ClassItem::Char(c) => push_escaped(c, CLASS_META, out),
        ClassItem::Range(lo, hi) => {
            push_escaped(lo, CLASS_META, out);
            out.push('-');
            push_escaped(hi, CLASS_META, out);
        }
        ClassItem::Macro(m) => out.push_str(m.as_str()),
    }
}

fn write_operand(r: &Regex, out: &mut String) {
    match r {
        Regex::Literal(_) | Regex::Class(_) | Regex::Macro(_) | Regex::Alt(_) | Regex::Epsilon => {
            write_node(r, out)
        }
        _ => {
            out.push('(');
            write_node(r, out);
            out.push(')');
        }
    }
}

fn write_node(r: &Regex, out: &mut String) {
    match r {
        Regex::Concat(children) => {
            for c in children {
                if matches!(c, Regex::Concat(_)) {
                    out.push('(');
                    write_node(c, out);
                    out.push(')');
                } else {
                    write_node(c, out);
                }
            }
        }
        Regex::Alt(children) => {
            out.push('(');
            for (i, c) in children.iter().enumerate() {
                if i > 0 {
                    out.push('|');
                }
                write_node(c, out);
            }
            out.push(')');
        }
        Regex::Class(items) => {
            out.push('[');
            for it in items {
                write_item(it, out);
            }
            out.push(']');
        }
        Regex::Star(c) => {
            write_operand(c, out);
            out.push('*');
        }
        Regex::Plus(c) => {
            write_operand(c, out);
            out.push('+');
        }
        Regex::Optional(c) => {
            write_operand(c, out);
            out.push('?');
        }
        Regex::Repeat(c, n) => {
            write_operand(c, out);
            out.push_str(&format!("{{{n}}}"));
        }
        Regex::RepeatRange(c, lo, hi) => {
            write_operand(c, out);
            out.push_str(&format!("{{{lo},{hi}}}"));
        }
        Regex::Literal(c) => push_escaped(*c, META, out),
        Regex::Macro(m) => out.push_str(m.as_str()),
        Regex::Epsilon => out.push_str("()"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regex::{parse_regex, Shorthand};

    #[test]
    fn disjunction_is_parenthesized() {
        let r = Regex::Alt(vec![Regex::Literal('a'), Regex::Literal('b')]);
        assert_eq!(print_regex(&r), "(a|b)");
    }

    #[test]
    fn repeat_range_of_macro_class() {
        let r = Regex::RepeatRange(
            Box::new(Regex::Class(vec![ClassItem::Macro(Shorthand::Digit)])),
            2,
            6,
        );
        assert_eq!(print_regex(&r), "[\\d]{2,6}");
    }

    #[test]
    fn epsilon() {
        assert_eq!(print_regex(&Regex::Epsilon), "");
        let r = Regex::Alt(vec![Regex::Epsilon, Regex::Literal('a')]);
        assert_eq!(print_regex(&r), "(()|a)");
        assert_eq!(parse_regex("(()|a)").unwrap(), r);
    }

    #[test]
    fn fixed_point() {
        for s in [
            "[b0-9]{2}c(aa|b)*",
            "a(bc)d",
            "(a*)*",
            "x\\.y\\(z\\)",
            "[\\]\\-a-z]+",
            "First name: [\\S]+ Surname: \\S+",
            "(ab)?",
            "\\t\\n",
        ] {
            let once = print_regex(&parse_regex(s).unwrap());
            let twice = print_regex(&parse_regex(&once).unwrap());
            assert_eq!(once, twice, "{s}");
            assert_eq!(once, s);
        }
    }

    #[test]
    fn redundant_parens_dropped() {
        assert_eq!(print_regex(&parse_regex("((a))b").unwrap()), "ab");
        assert_eq!(print_regex(&parse_regex("a**").unwrap()), "(a*)*");
    }
}
