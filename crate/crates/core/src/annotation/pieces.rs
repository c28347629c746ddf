use alloc::string::String;
use alloc::vec::Vec;

use super::{Element, Node};

/// A container's children split into tokens and whitespace.
///
/// Bare text is cut at whitespace: runs of non-whitespace characters become
/// [`Piece::Word`]s, whitespace runs become [`Piece::Space`]s.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Piece {
    Space(String),
    Word(String),
    Element(Element),
}

impl Piece {
    pub fn is_token(&self) -> bool {
        !matches!(self, Piece::Space(_))
    }
}

pub fn into_pieces(children: Vec<Node>) -> Vec<Piece> {
    let mut out = Vec::new();
    for c in children {
        match c {
            Node::Element(e) => out.push(Piece::Element(e)),
            Node::Text(t) => split_text(&t, &mut out),
        }
    }
    out
}

fn split_text(text: &str, out: &mut Vec<Piece>) {
    let mut cur = String::new();
    let mut cur_space = false;
    for ch in text.chars() {
        let space = ch.is_whitespace();
        if !cur.is_empty() && space != cur_space {
            out.push(if cur_space {
                Piece::Space(core::mem::take(&mut cur))
            } else {
                Piece::Word(core::mem::take(&mut cur))
            });
        }
        cur_space = space;
        cur.push(ch);
    }
    if !cur.is_empty() {
        out.push(if cur_space { Piece::Space(cur) } else { Piece::Word(cur) });
    }
}

/// Rebuilds canonical children (adjacent text merged) from pieces.
pub fn from_pieces(pieces: Vec<Piece>) -> Vec<Node> {
    let mut holder = Element::new("_");
    for p in pieces {
        match p {
            Piece::Space(s) | Piece::Word(s) => holder.push_text(s),
            Piece::Element(e) => holder.push(e),
        }
    }
    holder.take_children()
}

/// Collapses whitespace runs to single spaces and trims the ends.
pub fn normalize_space(text: &str) -> String {
    let mut out = String::new();
    for w in text.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(w);
    }
    out
}
