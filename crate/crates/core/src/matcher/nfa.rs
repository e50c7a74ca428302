//! Thompson-style automaton with a breadth-first (Pike) simulation: time
//! linear in the input for a fixed expression.

use crate::regex::Regex;

#[derive(Debug, Clone)]
enum Inst {
    Char(char),
    /// Index into `Nfa::sets`.
    Set(usize),
    Split(usize, usize),
    Jmp(usize),
    Match,
}

#[derive(Debug, Clone)]
pub(crate) struct Nfa {
    insts: Vec<Inst>,
    sets: Vec<Regex>,
}

impl Nfa {
    pub(crate) fn compile(r: &Regex) -> Nfa {
        let mut nfa = Nfa {
            insts: Vec::new(),
            sets: Vec::new(),
        };
        nfa.emit(r);
        nfa.insts.push(Inst::Match);
        nfa
    }

    fn pc(&self) -> usize {
        self.insts.len()
    }

    fn emit(&mut self, r: &Regex) {
        match r {
            Regex::Literal(c) => self.insts.push(Inst::Char(*c)),
            Regex::Class(_) | Regex::Macro(_) => {
                self.sets.push(r.clone());
                self.insts.push(Inst::Set(self.sets.len() - 1));
            }
            Regex::Epsilon => {}
            Regex::Concat(children) => children.iter().for_each(|c| self.emit(c)),
            Regex::Alt(children) => {
                let mut jumps = Vec::new();
                for (i, c) in children.iter().enumerate() {
                    if i + 1 < children.len() {
                        let split = self.pc();
                        self.insts.push(Inst::Split(split + 1, usize::MAX));
                        self.emit(c);
                        jumps.push(self.pc());
                        self.insts.push(Inst::Jmp(usize::MAX));
                        let next = self.pc();
                        self.insts[split] = Inst::Split(split + 1, next);
                    } else {
                        self.emit(c);
                    }
                }
                let end = self.pc();
                for j in jumps {
                    self.insts[j] = Inst::Jmp(end);
                }
            }
            Regex::Star(c) => self.star(c),
            Regex::Plus(c) => {
                let start = self.pc();
                self.emit(c);
                let end = self.pc() + 1;
                self.insts.push(Inst::Split(start, end));
            }
            Regex::Optional(c) => self.optional(c),
            Regex::Repeat(c, n) => (0..*n).for_each(|_| self.emit(c)),
            Regex::RepeatRange(c, lo, hi) => {
                (0..*lo).for_each(|_| self.emit(c));
                (*lo..*hi).for_each(|_| self.optional(c));
            }
        }
    }

    fn star(&mut self, c: &Regex) {
        let split = self.pc();
        self.insts.push(Inst::Split(split + 1, usize::MAX));
        self.emit(c);
        self.insts.push(Inst::Jmp(split));
        let end = self.pc();
        self.insts[split] = Inst::Split(split + 1, end);
    }

    fn optional(&mut self, c: &Regex) {
        let split = self.pc();
        self.insts.push(Inst::Split(split + 1, usize::MAX));
        self.emit(c);
        let end = self.pc();
        self.insts[split] = Inst::Split(split + 1, end);
    }

    fn add_thread(&self, list: &mut Vec<usize>, seen: &mut [u32], stamp: u32, pc: usize) {
        let mut stack = vec![pc];
        while let Some(pc) = stack.pop() {
            if seen[pc] == stamp {
                continue;
            }
            seen[pc] = stamp;
            match self.insts[pc] {
                Inst::Split(a, b) => {
                    stack.push(b);
                    stack.push(a);
                }
                Inst::Jmp(t) => stack.push(t),
                _ => list.push(pc),
            }
        }
    }

    pub(crate) fn is_match(&self, input: &str) -> bool {
        let mut seen = vec![0u32; self.insts.len()];
        let mut stamp = 1;
        let mut clist = Vec::new();
        let mut nlist = Vec::new();
        self.add_thread(&mut clist, &mut seen, stamp, 0);
        for c in input.chars() {
            stamp += 1;
            nlist.clear();
            for &pc in &clist {
                let ok = match self.insts[pc] {
                    Inst::Char(x) => x == c,
                    Inst::Set(s) => self.sets[s].char_matches(c),
                    _ => false,
                };
                if ok {
                    self.add_thread(&mut nlist, &mut seen, stamp, pc + 1);
                }
            }
            std::mem::swap(&mut clist, &mut nlist);
            if clist.is_empty() {
                return false;
            }
        }
        clist.iter().any(|&pc| matches!(self.insts[pc], Inst::Match))
    }
}
