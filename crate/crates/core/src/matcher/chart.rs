//! Span chart over the syntax tree: which end positions each node can reach
//! from each start, and the derivations that realize a given span.
//!
//! Iteration convention for a repetition with bounds `[min, max]`: either
//! exactly `min` iterations, each of which may be empty, or more than `min`
//! iterations, none of which is empty. This keeps the set of derivations
//! finite while still deriving every string of the language.

use std::collections::HashMap;
use std::rc::Rc;
use std::sync::Arc;

use crate::regex::{NodeId, Regex, SyntaxTree};

use super::ParseNode;

#[derive(Debug, Clone)]
pub(crate) enum Op {
    Empty,
    /// One character accepted by the node label.
    Atom,
    /// A bracket class with item children; the first covering item is used.
    Class(Vec<NodeId>),
    Seq(Vec<NodeId>),
    Alt(Vec<NodeId>),
    Rep {
        child: NodeId,
        min: u32,
        max: Option<u32>,
    },
}

pub(crate) fn ops_for(tree: &SyntaxTree) -> Vec<Op> {
    tree.nodes()
        .iter()
        .map(|n| match &n.label {
            Regex::Epsilon => Op::Empty,
            Regex::Literal(_) | Regex::Macro(_) => Op::Atom,
            Regex::Class(_) if n.children.is_empty() => Op::Atom,
            Regex::Class(_) => Op::Class(n.children.clone()),
            Regex::Concat(_) => Op::Seq(n.children.clone()),
            Regex::Alt(_) => Op::Alt(n.children.clone()),
            Regex::Star(_) => Op::Rep {
                child: n.children[0],
                min: 0,
                max: None,
            },
            Regex::Plus(_) => Op::Rep {
                child: n.children[0],
                min: 1,
                max: None,
            },
            Regex::Optional(_) => Op::Rep {
                child: n.children[0],
                min: 0,
                max: Some(1),
            },
            Regex::Repeat(_, k) => Op::Rep {
                child: n.children[0],
                min: *k,
                max: Some(*k),
            },
            Regex::RepeatRange(_, lo, hi) => Op::Rep {
                child: n.children[0],
                min: *lo,
                max: Some(*hi),
            },
        })
        .collect()
}

type Set = Rc<[u32]>;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum RepTag {
    Unrestricted,
    NonEmpty,
    AtLeast,
}

pub(crate) struct Chart<'a> {
    ops: &'a [Op],
    tree: &'a SyntaxTree,
    x: &'a [char],
    limit: usize,
    ends_memo: HashMap<(u32, u32), Set>,
    seq_memo: HashMap<(u32, u32, u32), Set>,
    rep_memo: HashMap<(u32, RepTag, u32, u32), Set>,
    tree_memo: HashMap<(u32, u32, u32), Rc<Vec<Arc<ParseNode>>>>,
}

fn union(parts: Vec<u32>) -> Set {
    let mut v = parts;
    v.sort_unstable();
    v.dedup();
    v.into()
}

fn has(set: &[u32], j: u32) -> bool {
    set.binary_search(&j).is_ok()
}

impl<'a> Chart<'a> {
    pub(crate) fn new(ops: &'a [Op], tree: &'a SyntaxTree, x: &'a [char], limit: usize) -> Self {
        Chart {
            ops,
            tree,
            x,
            limit,
            ends_memo: HashMap::new(),
            seq_memo: HashMap::new(),
            rep_memo: HashMap::new(),
            tree_memo: HashMap::new(),
        }
    }

    fn n(&self) -> u32 {
        self.x.len() as u32
    }

    fn accepts(&self, v: NodeId, i: u32) -> bool {
        (i as usize) < self.x.len() && self.tree.node(v).label.char_matches(self.x[i as usize])
    }

    pub(crate) fn ends(&mut self, v: NodeId, i: u32) -> Set {
        if let Some(s) = self.ends_memo.get(&(v as u32, i)) {
            return s.clone();
        }
        let ops = self.ops;
        let out: Set = match &ops[v] {
            Op::Empty => Rc::from([i]),
            Op::Atom | Op::Class(_) => {
                if self.accepts(v, i) {
                    Rc::from([i + 1])
                } else {
                    Rc::from([])
                }
            }
            Op::Seq(_) => self.seq(v, 0, i),
            Op::Alt(children) => {
                let mut acc = Vec::new();
                for &c in children {
                    acc.extend_from_slice(&self.ends(c, i));
                }
                union(acc)
            }
            &Op::Rep { min, max, .. } => {
                let mut acc = self.rep(v, RepTag::Unrestricted, min, i).to_vec();
                match max {
                    None => acc.extend_from_slice(&self.rep(v, RepTag::AtLeast, min + 1, i)),
                    Some(max) => {
                        let top = max.min(self.n() - i);
                        for k in min + 1..=top {
                            acc.extend_from_slice(&self.rep(v, RepTag::NonEmpty, k, i));
                        }
                    }
                }
                union(acc)
            }
        };
        self.ends_memo.insert((v as u32, i), out.clone());
        out
    }

    /// End positions of `children[k..]` of a sequence node started at `i`.
    fn seq(&mut self, v: NodeId, k: usize, i: u32) -> Set {
        let ops = self.ops;
        let Op::Seq(children) = &ops[v] else {
            unreachable!()
        };
        if k == children.len() {
            return Rc::from([i]);
        }
        let key = (v as u32, k as u32, i);
        if let Some(s) = self.seq_memo.get(&key) {
            return s.clone();
        }
        let mut acc = Vec::new();
        for &p in self.ends(children[k], i).iter() {
            acc.extend_from_slice(&self.seq(v, k + 1, p));
        }
        let out = union(acc);
        self.seq_memo.insert(key, out.clone());
        out
    }

    /// Reach sets of a repetition node after `m` further iterations:
    /// `Unrestricted` exactly `m` (empty allowed), `NonEmpty` exactly `m`
    /// non-empty, `AtLeast` at least `m` non-empty.
    fn rep(&mut self, v: NodeId, tag: RepTag, m: u32, i: u32) -> Set {
        let key = (v as u32, tag, m, i);
        if let Some(s) = self.rep_memo.get(&key) {
            return s.clone();
        }
        let ops = self.ops;
        let Op::Rep { child, .. } = ops[v] else {
            unreachable!()
        };
        let mut acc = Vec::new();
        match tag {
            RepTag::Unrestricted | RepTag::NonEmpty if m == 0 => acc.push(i),
            RepTag::Unrestricted => {
                for &p in self.ends(child, i).iter() {
                    acc.extend_from_slice(&self.rep(v, tag, m - 1, p));
                }
            }
            RepTag::NonEmpty => {
                for &p in self.ends(child, i).iter().filter(|&&p| p > i) {
                    acc.extend_from_slice(&self.rep(v, tag, m - 1, p));
                }
            }
            RepTag::AtLeast => {
                if m == 0 {
                    acc.push(i);
                }
                for &p in self.ends(child, i).iter().filter(|&&p| p > i) {
                    acc.extend_from_slice(&self.rep(v, tag, m.saturating_sub(1), p));
                }
            }
        }
        let out = union(acc);
        self.rep_memo.insert(key, out.clone());
        out
    }

    fn full(&self, out: &[Arc<ParseNode>]) -> bool {
        out.len() >= self.limit
    }

    fn emit(&self, v: NodeId, i: u32, j: u32, stack: &[Arc<ParseNode>], out: &mut Vec<Arc<ParseNode>>) {
        out.push(Arc::new(ParseNode {
            node: v,
            start: i as usize,
            end: j as usize,
            children: stack.to_vec(),
        }));
    }

    /// Derivations of `x[i..j]` from node `v`, in enumeration order,
    /// truncated to the chart limit. Callers must ensure `j ∈ ends(v, i)`.
    pub(crate) fn trees(&mut self, v: NodeId, i: u32, j: u32) -> Rc<Vec<Arc<ParseNode>>> {
        let key = (v as u32, i, j);
        if let Some(t) = self.tree_memo.get(&key) {
            return t.clone();
        }
        let ops = self.ops;
        let mut out = Vec::new();
        let mut stack = Vec::new();
        match &ops[v] {
            Op::Empty => {
                if i == j {
                    self.emit(v, i, j, &stack, &mut out);
                }
            }
            Op::Atom => {
                if j == i + 1 && self.accepts(v, i) {
                    self.emit(v, i, j, &stack, &mut out);
                }
            }
            Op::Class(items) => {
                if j == i + 1 {
                    if let Some(&item) = items.iter().find(|&&c| self.accepts(c, i)) {
                        stack.push(Arc::new(ParseNode {
                            node: item,
                            start: i as usize,
                            end: j as usize,
                            children: Vec::new(),
                        }));
                        self.emit(v, i, j, &stack, &mut out);
                    }
                }
            }
            Op::Alt(children) => {
                for &c in children {
                    if self.full(&out) {
                        break;
                    }
                    if has(&self.ends(c, i), j) {
                        for t in self.trees(c, i, j).iter() {
                            if self.full(&out) {
                                break;
                            }
                            stack.clear();
                            stack.push(t.clone());
                            self.emit(v, i, j, &stack, &mut out);
                        }
                    }
                }
            }
            Op::Seq(_) => self.dfs_seq(v, 0, i, i, j, &mut stack, &mut out),
            &Op::Rep { child, min, max } => {
                self.dfs_rep(v, child, RepTag::Unrestricted, min, i, i, j, &mut stack, &mut out);
                match max {
                    None => self.dfs_rep(v, child, RepTag::AtLeast, min + 1, i, i, j, &mut stack, &mut out),
                    Some(max) => {
                        let top = max.min(j - i);
                        for k in min + 1..=top {
                            self.dfs_rep(v, child, RepTag::NonEmpty, k, i, i, j, &mut stack, &mut out);
                        }
                    }
                }
            }
        }
        let out = Rc::new(out);
        self.tree_memo.insert(key, out.clone());
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn dfs_seq(
        &mut self,
        v: NodeId,
        k: usize,
        start: u32,
        pos: u32,
        j: u32,
        stack: &mut Vec<Arc<ParseNode>>,
        out: &mut Vec<Arc<ParseNode>>,
    ) {
        let ops = self.ops;
        let Op::Seq(children) = &ops[v] else {
            unreachable!()
        };
        if k == children.len() {
            if pos == j {
                self.emit(v, start, j, stack, out);
            }
            return;
        }
        let c = children[k];
        for &p in self.ends(c, pos).iter() {
            if p > j || self.full(out) {
                break;
            }
            if !has(&self.seq(v, k + 1, p), j) {
                continue;
            }
            for t in self.trees(c, pos, p).iter() {
                if self.full(out) {
                    break;
                }
                stack.push(t.clone());
                self.dfs_seq(v, k + 1, start, p, j, stack, out);
                stack.pop();
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn dfs_rep(
        &mut self,
        v: NodeId,
        child: NodeId,
        tag: RepTag,
        remaining: u32,
        start: u32,
        pos: u32,
        j: u32,
        stack: &mut Vec<Arc<ParseNode>>,
        out: &mut Vec<Arc<ParseNode>>,
    ) {
        let done = match tag {
            RepTag::AtLeast => pos == j,
            _ => remaining == 0,
        };
        if done {
            if pos == j && remaining == 0 {
                self.emit(v, start, j, stack, out);
            }
            return;
        }
        let next = remaining.saturating_sub(1);
        for &p in self.ends(child, pos).iter() {
            if p > j || self.full(out) {
                break;
            }
            if tag != RepTag::Unrestricted && p == pos {
                continue;
            }
            if !has(&self.rep(v, tag, next, p), j) {
                continue;
            }
            for t in self.trees(child, pos, p).iter() {
                if self.full(out) {
                    break;
                }
                stack.push(t.clone());
                self.dfs_rep(v, child, tag, next, start, p, j, stack, out);
                stack.pop();
            }
        }
    }
}
