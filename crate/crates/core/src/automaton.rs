//! Finite automata for token patterns.
//!
//! Patterns use a small regular-expression syntax and are compiled to a
//! Thompson NFA that is simulated in lock step (Pike VM), so matching is
//! linear in the input for a fixed pattern. The matcher reports the
//! *longest* match starting at a given position; among equally long matches
//! the captures of the highest-priority path are kept.
//!
//! Supported syntax: literals, `.`, classes `[a-z0-9-]` / `[^...]`, escapes
//! `\d \w \s \D \W \S` and escaped metacharacters, groups `(...)`,
//! non-capturing `(?:...)`, named captures `(?<NAME>...)` (names may repeat
//! and may contain `-`), alternation `|`, and the greedy quantifiers
//! `* + ? {n} {n,} {n,m}`.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("bad pattern at offset {offset}: {reason}")]
pub struct PatternError {
    pub offset: usize,
    pub reason: String,
}

const MAX_REPEAT: u32 = 256;

#[derive(Debug, Clone)]
enum ClassItem {
    Range(char, char),
    Digit(bool),
    Word(bool),
    Space(bool),
}

impl ClassItem {
    fn matches(&self, c: char) -> bool {
        match *self {
            ClassItem::Range(lo, hi) => lo <= c && c <= hi,
            ClassItem::Digit(neg) => c.is_ascii_digit() != neg,
            ClassItem::Word(neg) => (c.is_alphanumeric() || c == '_') != neg,
            ClassItem::Space(neg) => c.is_whitespace() != neg,
        }
    }
}

#[derive(Debug, Clone)]
struct Class {
    negated: bool,
    items: Vec<ClassItem>,
}

impl Class {
    fn matches(&self, c: char) -> bool {
        self.items.iter().any(|i| i.matches(c)) != self.negated
    }
}

#[derive(Debug, Clone)]
enum Ast {
    Empty,
    Char(char),
    Any,
    Class(Class),
    Concat(Vec<Ast>),
    Alt(Vec<Ast>),
    Group(Option<usize>, Box<Ast>),
    Repeat(Box<Ast>, u32, Option<u32>),
}

/// Named capture group metadata.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupInfo {
    pub name: String,
    /// Innermost enclosing named group.
    pub parent: Option<usize>,
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
    groups: Vec<GroupInfo>,
    open: Vec<usize>,
}

impl Parser {
    fn err<T>(&self, reason: &str) -> Result<T, PatternError> {
        Err(PatternError {
            offset: self.pos,
            reason: String::from(reason),
        })
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn alt(&mut self) -> Result<Ast, PatternError> {
        let mut branches = vec![self.concat()?];
        while self.peek() == Some('|') {
            self.pos += 1;
            branches.push(self.concat()?);
        }
        Ok(if branches.len() == 1 {
            branches.pop().unwrap()
        } else {
            Ast::Alt(branches)
        })
    }

    fn concat(&mut self) -> Result<Ast, PatternError> {
        let mut items = Vec::new();
        while let Some(c) = self.peek() {
            if c == '|' || c == ')' {
                break;
            }
            let atom = self.atom()?;
            items.push(self.quantified(atom)?);
        }
        Ok(match items.len() {
            0 => Ast::Empty,
            1 => items.pop().unwrap(),
            _ => Ast::Concat(items),
        })
    }

    fn quantified(&mut self, mut atom: Ast) -> Result<Ast, PatternError> {
        loop {
            let (min, max) = match self.peek() {
                Some('*') => {
                    self.pos += 1;
                    (0, None)
                }
                Some('+') => {
                    self.pos += 1;
                    (1, None)
                }
                Some('?') => {
                    self.pos += 1;
                    (0, Some(1))
                }
                Some('{') => self.counted()?,
                _ => return Ok(atom),
            };
            atom = Ast::Repeat(Box::new(atom), min, max);
        }
    }

    fn number(&mut self) -> Option<u32> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return None;
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        s.parse().ok()
    }

    fn counted(&mut self) -> Result<(u32, Option<u32>), PatternError> {
        self.pos += 1; // '{'
        let min = match self.number() {
            Some(n) => n,
            None => return self.err("expected repetition count"),
        };
        let max = if self.peek() == Some(',') {
            self.pos += 1;
            self.number()
        } else {
            Some(min)
        };
        if self.peek() != Some('}') {
            return self.err("expected `}`");
        }
        self.pos += 1;
        if min > MAX_REPEAT || max.is_some_and(|m| m > MAX_REPEAT) {
            return self.err("repetition count too large");
        }
        if max.is_some_and(|m| m < min) {
            return self.err("repetition bounds out of order");
        }
        Ok((min, max))
    }

    fn atom(&mut self) -> Result<Ast, PatternError> {
        let c = self.peek().unwrap();
        self.pos += 1;
        match c {
            '.' => Ok(Ast::Any),
            '[' => self.class(),
            '(' => self.group(),
            '\\' => self.escape(),
            '*' | '+' | '?' | '{' => {
                self.pos -= 1;
                self.err("quantifier without operand")
            }
            c => Ok(Ast::Char(c)),
        }
    }

    fn escape(&mut self) -> Result<Ast, PatternError> {
        let c = match self.peek() {
            Some(c) => c,
            None => return self.err("dangling escape"),
        };
        self.pos += 1;
        let item = match c {
            'd' => ClassItem::Digit(false),
            'D' => ClassItem::Digit(true),
            'w' => ClassItem::Word(false),
            'W' => ClassItem::Word(true),
            's' => ClassItem::Space(false),
            'S' => ClassItem::Space(true),
            't' => return Ok(Ast::Char('\t')),
            'n' => return Ok(Ast::Char('\n')),
            c if c.is_alphanumeric() => return self.err("unknown escape"),
            c => return Ok(Ast::Char(c)),
        };
        Ok(Ast::Class(Class {
            negated: false,
            items: vec![item],
        }))
    }

    fn class(&mut self) -> Result<Ast, PatternError> {
        let mut negated = false;
        if self.peek() == Some('^') {
            negated = true;
            self.pos += 1;
        }
        let mut items = Vec::new();
        let mut first = true;
        loop {
            let c = match self.peek() {
                Some(c) => c,
                None => return self.err("unterminated class"),
            };
            if c == ']' && !first {
                self.pos += 1;
                break;
            }
            first = false;
            self.pos += 1;
            let lo = if c == '\\' {
                let e = match self.peek() {
                    Some(e) => e,
                    None => return self.err("dangling escape"),
                };
                self.pos += 1;
                match e {
                    'd' => {
                        items.push(ClassItem::Digit(false));
                        continue;
                    }
                    'w' => {
                        items.push(ClassItem::Word(false));
                        continue;
                    }
                    's' => {
                        items.push(ClassItem::Space(false));
                        continue;
                    }
                    't' => '\t',
                    'n' => '\n',
                    e => e,
                }
            } else {
                c
            };
            if self.peek() == Some('-') && self.chars.get(self.pos + 1).is_some_and(|&n| n != ']') {
                self.pos += 1;
                let mut hi = self.peek().unwrap();
                self.pos += 1;
                if hi == '\\' {
                    hi = match self.peek() {
                        Some(h) => h,
                        None => return self.err("dangling escape"),
                    };
                    self.pos += 1;
                }
                if hi < lo {
                    return self.err("class range out of order");
                }
                items.push(ClassItem::Range(lo, hi));
            } else {
                items.push(ClassItem::Range(lo, lo));
            }
        }
        Ok(Ast::Class(Class { negated, items }))
    }

    fn group(&mut self) -> Result<Ast, PatternError> {
        let mut index = None;
        if self.peek() == Some('?') {
            self.pos += 1;
            match self.peek() {
                Some(':') => self.pos += 1,
                Some('<') | Some('P') => {
                    if self.peek() == Some('P') {
                        self.pos += 1;
                        if self.peek() != Some('<') {
                            return self.err("expected `<` after `(?P`");
                        }
                    }
                    self.pos += 1;
                    let start = self.pos;
                    while matches!(self.peek(), Some(c) if c != '>') {
                        self.pos += 1;
                    }
                    if self.peek() != Some('>') {
                        return self.err("unterminated group name");
                    }
                    let name: String = self.chars[start..self.pos].iter().collect();
                    self.pos += 1;
                    if !crate::annotation::is_valid_name(&name) {
                        return self.err("group name is not a valid tag name");
                    }
                    let idx = self.groups.len();
                    self.groups.push(GroupInfo {
                        name,
                        parent: self.open.last().copied(),
                    });
                    index = Some(idx);
                }
                _ => return self.err("unsupported group flag"),
            }
        }
        if let Some(i) = index {
            self.open.push(i);
        }
        let inner = self.alt()?;
        if index.is_some() {
            self.open.pop();
        }
        if self.peek() != Some(')') {
            return self.err("expected `)`");
        }
        self.pos += 1;
        Ok(Ast::Group(index, Box::new(inner)))
    }
}

#[derive(Debug, Clone)]
enum Inst {
    Char(char),
    Any,
    Class(Class),
    Split(usize, usize),
    Jmp(usize),
    Save(usize),
    Match,
}

/// A compiled token pattern.
#[derive(Debug, Clone)]
pub struct Automaton {
    source: String,
    prog: Vec<Inst>,
    groups: Vec<GroupInfo>,
}

/// Result of [`Automaton::longest_match`]: end position (exclusive, in
/// chars) and per-group capture spans.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Match {
    pub start: usize,
    pub end: usize,
    pub captures: Vec<Option<(usize, usize)>>,
}

impl Automaton {
    pub fn compile(pattern: &str) -> Result<Automaton, PatternError> {
        let mut p = Parser {
            chars: pattern.chars().collect(),
            pos: 0,
            groups: Vec::new(),
            open: Vec::new(),
        };
        let ast = p.alt()?;
        if p.pos != p.chars.len() {
            return p.err("unbalanced `)`");
        }
        let mut prog = Vec::new();
        emit(&ast, &mut prog);
        prog.push(Inst::Match);
        Ok(Automaton {
            source: String::from(pattern),
            prog,
            groups: p.groups,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn groups(&self) -> &[GroupInfo] {
        &self.groups
    }

    /// Index of the first group named `name`.
    pub fn group_index(&self, name: &str) -> Option<usize> {
        self.groups.iter().position(|g| g.name == name)
    }

    /// Longest match of the pattern starting at `start`, considering only end
    /// positions for which `accept_end` holds. Empty matches are never
    /// reported.
    pub fn longest_match(&self, input: &[char], start: usize, accept_end: impl Fn(usize) -> bool) -> Option<Match> {
        let slots = self.groups.len() * 2;
        let n = self.prog.len();
        let mut clist = Threads::new(n);
        let mut nlist = Threads::new(n);
        let mut best: Option<Match> = None;
        let mut seen = vec![usize::MAX; n];
        let mut generation = 0usize;
        self.add_thread(&mut clist, 0, start, vec![None; slots], &mut seen, generation);
        let mut pos = start;
        loop {
            if clist.items.is_empty() {
                break;
            }
            let mut matched_here = false;
            generation += 1;
            let c = input.get(pos).copied();
            for i in 0..clist.items.len() {
                let (pc, ref caps) = clist.items[i];
                match &self.prog[pc] {
                    Inst::Match => {
                        if !matched_here && pos > start && accept_end(pos) {
                            matched_here = true;
                            best = Some(Match {
                                start,
                                end: pos,
                                captures: caps.chunks(2).map(|s| s[0].zip(s[1])).collect(),
                            });
                        }
                    }
                    Inst::Char(want) => {
                        if c == Some(*want) {
                            let caps = caps.clone();
                            self.add_thread(&mut nlist, pc + 1, pos + 1, caps, &mut seen, generation);
                        }
                    }
                    Inst::Any => {
                        if c.is_some() {
                            let caps = caps.clone();
                            self.add_thread(&mut nlist, pc + 1, pos + 1, caps, &mut seen, generation);
                        }
                    }
                    Inst::Class(cls) => {
                        if c.is_some_and(|c| cls.matches(c)) {
                            let caps = caps.clone();
                            self.add_thread(&mut nlist, pc + 1, pos + 1, caps, &mut seen, generation);
                        }
                    }
                    Inst::Split(..) | Inst::Jmp(_) | Inst::Save(_) => {}
                }
            }
            if c.is_none() {
                break;
            }
            core::mem::swap(&mut clist, &mut nlist);
            nlist.items.clear();
            pos += 1;
        }
        best
    }

    fn add_thread(
        &self,
        list: &mut Threads,
        pc: usize,
        pos: usize,
        mut caps: Vec<Option<usize>>,
        seen: &mut [usize],
        generation: usize,
    ) {
        // iterative epsilon closure preserving priority order
        let mut stack: Vec<(usize, Option<(usize, Option<usize>)>)> = vec![(pc, None)];
        while let Some((pc, restore)) = stack.pop() {
            if let Some((slot, old)) = restore {
                caps[slot] = old;
                continue;
            }
            if seen[pc] == generation {
                continue;
            }
            seen[pc] = generation;
            match self.prog[pc] {
                Inst::Jmp(t) => stack.push((t, None)),
                Inst::Split(a, b) => {
                    stack.push((b, None));
                    stack.push((a, None));
                }
                Inst::Save(slot) => {
                    let old = caps[slot];
                    caps[slot] = Some(pos);
                    stack.push((0, Some((slot, old))));
                    stack.push((pc + 1, None));
                }
                _ => list.items.push((pc, caps.clone())),
            }
        }
    }
}

struct Threads {
    items: Vec<(usize, Vec<Option<usize>>)>,
}

impl Threads {
    fn new(cap: usize) -> Threads {
        Threads {
            items: Vec::with_capacity(cap),
        }
    }
}

fn emit(ast: &Ast, prog: &mut Vec<Inst>) {
    match ast {
        Ast::Empty => {}
        Ast::Char(c) => prog.push(Inst::Char(*c)),
        Ast::Any => prog.push(Inst::Any),
        Ast::Class(c) => prog.push(Inst::Class(c.clone())),
        Ast::Concat(items) => {
            for i in items {
                emit(i, prog);
            }
        }
        Ast::Alt(branches) => {
            let mut jumps = Vec::new();
            for (i, b) in branches.iter().enumerate() {
                if i + 1 < branches.len() {
                    let split = prog.len();
                    prog.push(Inst::Split(split + 1, 0));
                    emit(b, prog);
                    jumps.push(prog.len());
                    prog.push(Inst::Jmp(0));
                    let next = prog.len();
                    prog[split] = Inst::Split(split + 1, next);
                } else {
                    emit(b, prog);
                }
            }
            let end = prog.len();
            for j in jumps {
                prog[j] = Inst::Jmp(end);
            }
        }
        Ast::Group(idx, inner) => {
            if let Some(i) = idx {
                prog.push(Inst::Save(2 * i));
                emit(inner, prog);
                prog.push(Inst::Save(2 * i + 1));
            } else {
                emit(inner, prog);
            }
        }
        Ast::Repeat(inner, min, max) => {
            for _ in 0..*min {
                emit(inner, prog);
            }
            match max {
                None => {
                    let split = prog.len();
                    prog.push(Inst::Split(split + 1, 0));
                    emit(inner, prog);
                    prog.push(Inst::Jmp(split));
                    let end = prog.len();
                    prog[split] = Inst::Split(split + 1, end);
                }
                Some(max) => {
                    let mut splits = Vec::new();
                    for _ in *min..*max {
                        splits.push(prog.len());
                        prog.push(Inst::Split(0, 0));
                        emit(inner, prog);
                    }
                    let end = prog.len();
                    for s in splits {
                        prog[s] = Inst::Split(s + 1, end);
                    }
                }
            }
        }
    }
}
