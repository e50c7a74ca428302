//! Membership, parse trees, path label sets and matching lists.
//!
//! [`CompiledRegex`] bundles the automaton used for membership tests with
//! the syntax tree and span chart used to enumerate derivations. Both are
//! immutable once built; enumeration allocates per call.

mod chart;
mod nfa;

use std::collections::{BTreeSet, HashSet};
use std::sync::Arc;

use crate::regex::{print_regex, NodeId, Regex, SyntaxTree};
use crate::{Error, Result};

use chart::{ops_for, Chart, Op};
use nfa::Nfa;

/// Default bound on the number of parse trees enumerated per string.
pub const DEFAULT_TREE_CAP: usize = 32;

/// A node of a parse tree: the syntax node that spawned it and the span of
/// the input it derives. Nodes deriving a single character from a literal,
/// macro or single-range class are leaves; the character itself is the
/// implicit leaf label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseNode {
    pub node: NodeId,
    pub start: usize,
    pub end: usize,
    pub children: Vec<Arc<ParseNode>>,
}

/// One derivation of a string.
#[derive(Debug, Clone)]
pub struct ParseTree {
    pub root: Arc<ParseNode>,
    syntax: Arc<SyntaxTree>,
    input: Arc<[char]>,
}

/// The set of canonical labels on a root-to-character path.
pub type PathLabelSet = BTreeSet<String>;

/// Enumerated parse trees of one string, in enumeration order.
#[derive(Debug, Clone)]
pub struct ParseTrees {
    pub trees: Vec<ParseTree>,
    /// More derivations exist than were returned.
    pub was_truncated: bool,
}

impl ParseTrees {
    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }
}

impl ParseTree {
    pub fn syntax(&self) -> &SyntaxTree {
        &self.syntax
    }

    pub fn input(&self) -> &[char] {
        &self.input
    }

    /// Syntax-node ids on the path from the root to the character at
    /// zero-based position `pos`, root first.
    pub fn path_nodes(&self, pos: usize) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut cur = &self.root;
        loop {
            out.push(cur.node);
            match cur.children.iter().find(|c| c.start <= pos && pos < c.end) {
                Some(next) => cur = next,
                None => return out,
            }
        }
    }

    /// Labels on the path to the `i`-th character (one-based), including
    /// the character itself as a leaf label.
    pub fn path_labels(&self, i: usize) -> Result<PathLabelSet> {
        let len = self.input.len();
        if i == 0 || i > len {
            return Err(Error::IndexOutOfRange { index: i, len });
        }
        let mut set: PathLabelSet = self
            .path_nodes(i - 1)
            .into_iter()
            .map(|n| self.syntax.node(n).text.clone())
            .collect();
        set.insert(print_regex(&Regex::Literal(self.input[i - 1])));
        Ok(set)
    }

    /// The characters of the leaves, left to right.
    pub fn leaves(&self) -> String {
        let mut s = String::new();
        collect_leaves(&self.root, &self.input, &mut s);
        s
    }

    /// Visits every parse node once.
    pub fn walk(&self, mut f: impl FnMut(&ParseNode)) {
        fn go(n: &ParseNode, f: &mut impl FnMut(&ParseNode)) {
            f(n);
            for c in &n.children {
                go(c, f);
            }
        }
        go(&self.root, &mut f);
    }
}

fn collect_leaves(n: &ParseNode, input: &[char], out: &mut String) {
    if n.children.is_empty() {
        out.extend(&input[n.start..n.end]);
    } else {
        for c in &n.children {
            collect_leaves(c, input, out);
        }
    }
}

/// An expression prepared for repeated matching and enumeration.
#[derive(Debug, Clone)]
pub struct CompiledRegex {
    regex: Regex,
    syntax: Arc<SyntaxTree>,
    ops: Arc<Vec<Op>>,
    nfa: Arc<Nfa>,
}

impl CompiledRegex {
    pub fn new(regex: &Regex) -> CompiledRegex {
        let syntax = SyntaxTree::new(regex);
        let ops = ops_for(&syntax);
        CompiledRegex {
            regex: regex.clone(),
            syntax: Arc::new(syntax),
            ops: Arc::new(ops),
            nfa: Arc::new(Nfa::compile(regex)),
        }
    }

    pub fn regex(&self) -> &Regex {
        &self.regex
    }

    pub fn syntax(&self) -> &SyntaxTree {
        &self.syntax
    }

    pub fn is_match(&self, x: &str) -> bool {
        self.nfa.is_match(x)
    }

    /// All derivations of `x`, at most `cap` of them.
    pub fn parse_trees(&self, x: &str, cap: usize) -> ParseTrees {
        let input: Arc<[char]> = x.chars().collect();
        let roots = self.derive(&input, cap);
        let was_truncated = roots.len() > cap;
        let trees = roots
            .into_iter()
            .take(cap)
            .map(|root| ParseTree {
                root,
                syntax: self.syntax.clone(),
                input: input.clone(),
            })
            .collect();
        ParseTrees {
            trees,
            was_truncated,
        }
    }

    /// Up to `cap + 1` root nodes so truncation is detectable.
    fn derive(&self, input: &[char], cap: usize) -> Vec<Arc<ParseNode>> {
        let limit = cap.saturating_add(1).max(1);
        let mut chart = Chart::new(&self.ops, &self.syntax, input, limit);
        let n = input.len() as u32;
        if chart.ends(0, 0).binary_search(&n).is_err() {
            return Vec::new();
        }
        chart.trees(0, 0, n).as_ref().clone()
    }

    /// Matching lists of every syntax node over `batch`, indexed by node id.
    /// Nodes that spawn no parse node get an empty set.
    pub fn matching_lists<S: AsRef<str>>(&self, batch: &[S], cap: usize) -> Result<Vec<BTreeSet<String>>> {
        let mut lists = vec![BTreeSet::new(); self.syntax.len()];
        for x in batch {
            let x = x.as_ref();
            let input: Vec<char> = x.chars().collect();
            let roots = self.derive(&input, cap);
            if roots.is_empty() {
                return Err(Error::not_in_language(&self.regex, x));
            }
            let mut seen: HashSet<*const ParseNode> = HashSet::new();
            let mut stack: Vec<&ParseNode> = roots.iter().take(cap).map(|r| r.as_ref()).collect();
            while let Some(n) = stack.pop() {
                if !seen.insert(n as *const ParseNode) {
                    continue;
                }
                lists[n.node].insert(input[n.start..n.end].iter().collect());
                stack.extend(n.children.iter().map(|c| c.as_ref()));
            }
        }
        Ok(lists)
    }
}

/// Whether `x` is in the language of `y`.
pub fn matches(y: &Regex, x: &str) -> bool {
    CompiledRegex::new(y).is_match(x)
}

/// All derivations of `x` from `y`, at most `cap`.
pub fn parse_trees(y: &Regex, x: &str, cap: usize) -> ParseTrees {
    CompiledRegex::new(y).parse_trees(x, cap)
}

/// The substrings of batch strings generated by syntax node `v` of `y`.
pub fn matching_list<S: AsRef<str>>(y: &Regex, batch: &[S], v: NodeId, cap: usize) -> Result<BTreeSet<String>> {
    let mut lists = CompiledRegex::new(y).matching_lists(batch, cap)?;
    if v >= lists.len() {
        return Err(Error::IndexOutOfRange {
            index: v,
            len: lists.len(),
        });
    }
    Ok(std::mem::take(&mut lists[v]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regex::parse_regex;

    fn re(s: &str) -> Regex {
        parse_regex(s).unwrap()
    }

    fn set(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn membership() {
        let fig = re("[b0-9]{2}c(aa|b)*");
        assert!(matches(&fig, "1bc"));
        assert!(matches(&re("a*"), ""));
        assert!(matches(&re("(aa|b)*"), "aab"));
        assert!(!matches(&re("(aa|b)*"), "aba"));
        assert!(!matches(&fig, "1b"));
        assert!(matches(&re(".*"), "anything at all"));
        assert!(!matches(&re("."), "\n"));
    }

    #[test]
    fn figure_two_parse_tree() {
        let y = re("[b0-9]{2}c(aa|b)*");
        let p = parse_trees(&y, "1bc", 32);
        assert_eq!(p.len(), 1);
        assert!(!p.was_truncated);
        let t = &p.trees[0];
        let syn = t.syntax();
        let root = &t.root;
        assert_eq!(root.children.len(), 3);
        let rep = &root.children[0];
        assert_eq!(syn.node(rep.node).text, "[b0-9]{2}");
        // the class node spawns two parse nodes
        assert_eq!(rep.children.len(), 2);
        let yields: Vec<String> = rep
            .children
            .iter()
            .map(|c| {
                assert_eq!(syn.node(c.node).text, "[b0-9]");
                t.input()[c.start..c.end].iter().collect()
            })
            .collect();
        assert_eq!(yields, ["1", "b"]);
        assert_eq!(syn.node(rep.children[0].children[0].node).text, "[0-9]");
        assert_eq!(syn.node(rep.children[1].children[0].node).text, "b");
        // the star spawns one disjunction node yielding "b"
        let star = &root.children[2];
        assert_eq!(star.start, star.end);
        assert!(star.children.is_empty());
        assert_eq!(t.leaves(), "1bc");
    }

    #[test]
    fn star_iterations_over_disjunction() {
        let y = re("c(aa|b)*");
        let p = parse_trees(&y, "cb", 32);
        assert_eq!(p.len(), 1);
        let star = &p.trees[0].root.children[1];
        assert_eq!(star.children.len(), 1);
        assert_eq!(p.trees[0].syntax().node(star.children[0].node).text, "(aa|b)");
    }

    #[test]
    fn ambiguous_counts() {
        assert_eq!(parse_trees(&re("a|a"), "a", 32).len(), 2);
        assert_eq!(parse_trees(&re("(a|aa)(a|aa)"), "aaa", 32).len(), 2);
        assert_eq!(parse_trees(&re("(a*)*"), "aa", 32).len(), 2);
        assert_eq!(parse_trees(&re("(a*)+"), "", 32).len(), 1);
        assert_eq!(parse_trees(&re("(a*)?"), "", 32).len(), 1);
        assert_eq!(parse_trees(&re("(a*){2}"), "a", 32).len(), 2);
        assert!(parse_trees(&re("ab"), "ba", 32).is_empty());
    }

    #[test]
    fn truncation_flag() {
        let p = parse_trees(&re("(a|a)(a|a)(a|a)"), "aaa", 5);
        assert_eq!(p.len(), 5);
        assert!(p.was_truncated);
        let p = parse_trees(&re("(a|a)(a|a)(a|a)"), "aaa", 8);
        assert_eq!(p.len(), 8);
        assert!(!p.was_truncated);
    }

    #[test]
    fn truncated_prefix_is_stable() {
        let y = re("((a|a)|a)((a|aa)|a*)*");
        let full = parse_trees(&y, "aaaa", 10_000);
        let part = parse_trees(&y, "aaaa", 7);
        for (a, b) in full.trees.iter().zip(&part.trees) {
            assert_eq!(a.root, b.root);
        }
    }

    #[test]
    fn path_labels_examples() {
        let t = &parse_trees(&re("ab"), "ab", 32).trees[0];
        assert_eq!(t.path_labels(1).unwrap(), set(&["ab", "a"]));
        let t = &parse_trees(&re("[b0-9]{2}c(aa|b)*"), "1bc", 32).trees[0];
        assert_eq!(t.path_labels(3).unwrap(), set(&["[b0-9]{2}c(aa|b)*", "c"]));
        assert_eq!(
            t.path_labels(1).unwrap(),
            set(&["[b0-9]{2}c(aa|b)*", "[b0-9]{2}", "[b0-9]", "[0-9]", "1"])
        );
        let t = &parse_trees(&re("(a|b)"), "b", 32).trees[0];
        assert_eq!(t.path_labels(1).unwrap(), set(&["(a|b)", "b"]));
        assert!(matches!(t.path_labels(0), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(t.path_labels(2), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn matching_list_examples() {
        let y = re("[b0-9]{2}c(aa|b)*");
        let v = SyntaxTree::new(&y).find("[b0-9]{2}").unwrap();
        assert_eq!(matching_list(&y, &["12c", "b4caa"], v, 32).unwrap(), set(&["12", "b4"]));
        assert_eq!(matching_list(&y, &["12c", "b4caa"], 0, 32).unwrap(), set(&["12c", "b4caa"]));
        // a lone trailing "a" is not derivable from (aa|b)*
        assert!(!matches(&y, "b4ca"));
        assert_eq!(matching_list(&re("a*"), &[""], 0, 32).unwrap(), set(&[""]));
        assert!(matches!(
            matching_list(&y, &["zz"], 0, 32),
            Err(Error::NotInLanguage { .. })
        ));
    }

    #[test]
    fn class_uses_first_covering_item() {
        let y = re("[a\\w]");
        let p = parse_trees(&y, "a", 32);
        assert_eq!(p.len(), 1);
        assert_eq!(p.trees[0].syntax().node(p.trees[0].root.children[0].node).text, "a");
    }
}
