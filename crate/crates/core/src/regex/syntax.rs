use indexmap::IndexMap;

use super::{print_regex, ClassItem, Regex};

pub type NodeId = usize;

/// A node of a syntax tree: one occurrence of a subexpression.
#[derive(Debug, Clone)]
pub struct SyntaxNode {
    pub label: Regex,
    /// Canonical text of `label`.
    pub text: String,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
}

/// The operator structure of an expression, stored in preorder with the
/// root at index 0.
///
/// A character class with more than one item (or a single literal item)
/// has one child per item: a literal becomes `Literal`, a range becomes the
/// one-range class `[lo-hi]`, a macro becomes the bare macro. Single-range
/// and single-macro classes are leaves.
#[derive(Debug, Clone)]
pub struct SyntaxTree {
    nodes: Vec<SyntaxNode>,
}

pub(crate) fn class_item_label(item: &ClassItem) -> Regex {
    match *item {
        ClassItem::Char(c) => Regex::Literal(c),
        ClassItem::Range(..) => Regex::Class(vec![*item]),
        ClassItem::Macro(m) => Regex::Macro(m),
    }
}

/// Whether a class is a leaf of the syntax tree.
pub(crate) fn class_is_atomic(items: &[ClassItem]) -> bool {
    matches!(items, [ClassItem::Range(..) | ClassItem::Macro(_)])
}

impl SyntaxTree {
    pub fn new(r: &Regex) -> SyntaxTree {
        let mut t = SyntaxTree { nodes: Vec::new() };
        t.add(r.clone(), None);
        t
    }

    fn add(&mut self, label: Regex, parent: Option<NodeId>) -> NodeId {
        let id = self.nodes.len();
        let text = print_regex(&label);
        let kids: Vec<Regex> = match &label {
            Regex::Class(items) if !class_is_atomic(items) => {
                items.iter().map(class_item_label).collect()
            }
            other => other.children().to_vec(),
        };
        self.nodes.push(SyntaxNode {
            label,
            text,
            parent,
            children: Vec::with_capacity(kids.len()),
        });
        for k in kids {
            let child = self.add(k, Some(id));
            self.nodes[id].children.push(child);
        }
        id
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> &SyntaxNode {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[SyntaxNode] {
        &self.nodes
    }

    /// Parent/child pairs in preorder of the child.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .filter_map(|(i, n)| n.parent.map(|p| (p, i)))
    }

    /// The first node (in preorder) whose canonical text equals `text`.
    pub fn find(&self, text: &str) -> Option<NodeId> {
        self.nodes.iter().position(|n| n.text == text)
    }
}

/// The set of distinct subexpressions of a collection of expressions,
/// keyed and de-duplicated by canonical text, in first-occurrence order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Pool {
    items: IndexMap<String, Regex>,
}

impl Pool {
    pub fn new() -> Pool {
        Pool::default()
    }

    /// Adds every non-empty subexpression of `r`.
    pub fn extend_from(&mut self, r: &Regex) {
        for n in SyntaxTree::new(r).nodes {
            if n.label != Regex::Epsilon && !self.items.contains_key(&n.text) {
                self.items.insert(n.text, n.label);
            }
        }
    }

    /// Adds a single expression (not its subexpressions).
    pub fn insert(&mut self, r: Regex) -> bool {
        let text = print_regex(&r);
        if r == Regex::Epsilon || self.items.contains_key(&text) {
            return false;
        }
        self.items.insert(text, r);
        true
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn contains(&self, text: &str) -> bool {
        self.items.contains_key(text)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Regex)> {
        self.items.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn texts(&self) -> impl Iterator<Item = &str> {
        self.items.keys().map(String::as_str)
    }

    pub fn truncated(&self, n: usize) -> Pool {
        Pool {
            items: self.items.iter().take(n).map(|(k, v)| (k.clone(), v.clone())).collect(),
        }
    }
}

/// All subexpressions occurring anywhere in `regexes`.
pub fn subexpression_pool<'a>(regexes: impl IntoIterator<Item = &'a Regex>) -> Pool {
    let mut pool = Pool::new();
    for r in regexes {
        pool.extend_from(r);
    }
    pool
}
