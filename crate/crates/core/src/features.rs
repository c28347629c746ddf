//! Agreement features (case, number, gender) as sets of admissible triples.
//!
//! A [`FeatureSet`] is stored extensionally: each of the 4 × 2 × 3 = 24
//! combinations of case, number and gender is one bit. Unification is plain
//! set intersection, so the determiner "der" keeps its exact reading set
//! `{NOM.SG.MAS, GEN.SG.FEM, DAT.SG.FEM, GEN.PL._}` instead of collapsing into
//! per-dimension value lists.
//!
//! The textual form is a comma separated list of product terms
//! `CAS.NUM.GEN`, where each part is `_` (any value) or values joined by `+`:
//!
//! ```text
//! _                        every triple
//! DAT.SG.FEM               one triple
//! NOM+AKK.SG.NTR,GEN.PL._  a union of products
//! ```

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Case {
    Nom,
    Gen,
    Dat,
    Akk,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Number {
    Sg,
    Pl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Gender {
    Mas,
    Fem,
    Ntr,
}

impl Case {
    pub const ALL: [Case; 4] = [Case::Nom, Case::Gen, Case::Dat, Case::Akk];

    pub fn as_str(self) -> &'static str {
        match self {
            Case::Nom => "NOM",
            Case::Gen => "GEN",
            Case::Dat => "DAT",
            Case::Akk => "AKK",
        }
    }

    pub fn parse(s: &str) -> Option<Case> {
        Case::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s))
    }
}

impl Number {
    pub const ALL: [Number; 2] = [Number::Sg, Number::Pl];

    pub fn as_str(self) -> &'static str {
        match self {
            Number::Sg => "SG",
            Number::Pl => "PL",
        }
    }

    pub fn parse(s: &str) -> Option<Number> {
        Number::ALL
            .into_iter()
            .find(|n| n.as_str().eq_ignore_ascii_case(s))
    }
}

impl Gender {
    pub const ALL: [Gender; 3] = [Gender::Mas, Gender::Fem, Gender::Ntr];

    pub fn as_str(self) -> &'static str {
        match self {
            Gender::Mas => "MAS",
            Gender::Fem => "FEM",
            Gender::Ntr => "NTR",
        }
    }

    pub fn parse(s: &str) -> Option<Gender> {
        Gender::ALL
            .into_iter()
            .find(|g| g.as_str().eq_ignore_ascii_case(s))
    }
}

/// One feature dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dim {
    Cas,
    Num,
    Gen,
}

impl Dim {
    pub const ALL: [Dim; 3] = [Dim::Cas, Dim::Num, Dim::Gen];

    /// Attribute name used in the annotation format.
    pub fn as_str(self) -> &'static str {
        match self {
            Dim::Cas => "CAS",
            Dim::Num => "NUM",
            Dim::Gen => "GEN",
        }
    }

    pub fn parse(s: &str) -> Option<Dim> {
        Dim::ALL.into_iter().find(|d| d.as_str() == s)
    }

    fn width(self) -> usize {
        match self {
            Dim::Cas => 4,
            Dim::Num => 2,
            Dim::Gen => 3,
        }
    }

    fn value_name(self, v: usize) -> &'static str {
        match self {
            Dim::Cas => Case::ALL[v].as_str(),
            Dim::Num => Number::ALL[v].as_str(),
            Dim::Gen => Gender::ALL[v].as_str(),
        }
    }

    fn parse_value(self, s: &str) -> Option<usize> {
        match self {
            Dim::Cas => Case::parse(s).map(|c| c as usize),
            Dim::Num => Number::parse(s).map(|n| n as usize),
            Dim::Gen => Gender::parse(s).map(|g| g as usize),
        }
    }
}

/// A set of dimensions, used to restrict agreement to e.g. case only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DimMask(u8);

impl DimMask {
    pub const NONE: DimMask = DimMask(0);
    pub const ALL: DimMask = DimMask(0b111);

    pub fn single(dim: Dim) -> DimMask {
        DimMask(1 << dim as u8)
    }

    pub fn with(self, dim: Dim) -> DimMask {
        DimMask(self.0 | 1 << dim as u8)
    }

    pub fn contains(self, dim: Dim) -> bool {
        self.0 & (1 << dim as u8) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }
}

const TRIPLES: usize = 24;
const FULL: u32 = (1 << TRIPLES) - 1;

fn index(c: usize, n: usize, g: usize) -> usize {
    c * 6 + n * 3 + g
}

fn split(i: usize) -> [usize; 3] {
    [i / 6, (i / 3) % 2, i % 3]
}

/// A set of (case, number, gender) triples.
///
/// The empty set is representable so that intermediate computations can be
/// checked, but [`unify`] never returns it: failure is `None`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct FeatureSet(u32);

impl FeatureSet {
    /// Fully underspecified: all 24 triples.
    pub const ALL: FeatureSet = FeatureSet(FULL);
    pub const EMPTY: FeatureSet = FeatureSet(0);

    pub fn from_bits(bits: u32) -> FeatureSet {
        FeatureSet(bits & FULL)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn triple(c: Case, n: Number, g: Gender) -> FeatureSet {
        FeatureSet(1 << index(c as usize, n as usize, g as usize))
    }

    /// Cartesian product of per-dimension value lists; an empty list means
    /// "any value" for that dimension.
    pub fn product(cases: &[Case], numbers: &[Number], genders: &[Gender]) -> FeatureSet {
        let cs: Vec<usize> = if cases.is_empty() {
            (0..4).collect()
        } else {
            cases.iter().map(|&c| c as usize).collect()
        };
        let ns: Vec<usize> = if numbers.is_empty() {
            (0..2).collect()
        } else {
            numbers.iter().map(|&n| n as usize).collect()
        };
        let gs: Vec<usize> = if genders.is_empty() {
            (0..3).collect()
        } else {
            genders.iter().map(|&g| g as usize).collect()
        };
        let mut bits = 0;
        for &c in &cs {
            for &n in &ns {
                for &g in &gs {
                    bits |= 1 << index(c, n, g);
                }
            }
        }
        FeatureSet(bits)
    }

    /// All triples whose value in `dim` is one of `values` (indices).
    fn slab(dim: Dim, value: usize) -> FeatureSet {
        let mut bits = 0;
        for i in 0..TRIPLES {
            if split(i)[dim as usize] == value {
                bits |= 1 << i;
            }
        }
        FeatureSet(bits)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_full(self) -> bool {
        self.0 == FULL
    }

    /// Exactly one triple left: the features are fully specified.
    pub fn is_singleton(self) -> bool {
        self.0.count_ones() == 1
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, c: Case, n: Number, g: Gender) -> bool {
        self.0 & (1 << index(c as usize, n as usize, g as usize)) != 0
    }

    pub fn is_subset(self, other: FeatureSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn intersect(self, other: FeatureSet) -> FeatureSet {
        FeatureSet(self.0 & other.0)
    }

    pub fn union(self, other: FeatureSet) -> FeatureSet {
        FeatureSet(self.0 | other.0)
    }

    pub fn triples(self) -> impl Iterator<Item = (Case, Number, Gender)> {
        (0..TRIPLES).filter(move |i| self.0 & (1 << i) != 0).map(|i| {
            let [c, n, g] = split(i);
            (Case::ALL[c], Number::ALL[n], Gender::ALL[g])
        })
    }

    /// Keeps the values of the dimensions in `dims` and frees the others:
    /// every triple agreeing with some member of `self` on `dims`.
    pub fn lift(self, dims: DimMask) -> FeatureSet {
        let mut bits = 0;
        for i in 0..TRIPLES {
            if self.0 & (1 << i) == 0 {
                continue;
            }
            let [c, n, g] = split(i);
            for j in 0..TRIPLES {
                let [c2, n2, g2] = split(j);
                if (!dims.contains(Dim::Cas) || c == c2)
                    && (!dims.contains(Dim::Num) || n == n2)
                    && (!dims.contains(Dim::Gen) || g == g2)
                {
                    bits |= 1 << j;
                }
            }
        }
        FeatureSet(bits)
    }

    /// Value indices present in one dimension, as a bitmask.
    fn dim_values(self, dim: Dim) -> u8 {
        let mut mask = 0u8;
        for i in 0..TRIPLES {
            if self.0 & (1 << i) != 0 {
                mask |= 1 << split(i)[dim as usize];
            }
        }
        mask
    }

    /// Values of one dimension, rendered for an attribute:
    /// `_` when unconstrained, otherwise values joined by `+`.
    pub fn render_dim(self, dim: Dim) -> String {
        render_values(dim, self.dim_values(dim))
    }

    /// Parses a per-dimension attribute value (`_`, `DAT`, `DAT+AKK`) into
    /// the set of triples carrying one of those values.
    pub fn from_dim_value(dim: Dim, text: &str) -> Result<FeatureSet, FeatureParseError> {
        let mask = parse_values(dim, text)?;
        Ok(expand_dim(dim, mask))
    }

    /// Builds a set from per-dimension attribute values; missing
    /// dimensions are unconstrained.
    pub fn from_dims(cas: Option<&str>, num: Option<&str>, gen: Option<&str>) -> Result<FeatureSet, FeatureParseError> {
        let mut set = FeatureSet::ALL;
        for (dim, value) in [(Dim::Cas, cas), (Dim::Num, num), (Dim::Gen, gen)] {
            if let Some(v) = value {
                set = set.intersect(FeatureSet::from_dim_value(dim, v)?);
            }
        }
        Ok(set)
    }
}

/// Unification of two feature sets. `None` signals failure.
pub fn unify(a: FeatureSet, b: FeatureSet) -> Option<FeatureSet> {
    let r = a.intersect(b);
    if r.is_empty() {
        None
    } else {
        Some(r)
    }
}

fn expand_dim(dim: Dim, mask: u8) -> FeatureSet {
    let mut set = FeatureSet::EMPTY;
    for v in 0..dim.width() {
        if mask & (1 << v) != 0 {
            set = set.union(FeatureSet::slab(dim, v));
        }
    }
    set
}

fn full_mask(dim: Dim) -> u8 {
    (1u8 << dim.width()) - 1
}

fn render_values(dim: Dim, mask: u8) -> String {
    if mask == full_mask(dim) {
        return String::from("_");
    }
    let mut out = String::new();
    for v in 0..dim.width() {
        if mask & (1 << v) != 0 {
            if !out.is_empty() {
                out.push('+');
            }
            out.push_str(dim.value_name(v));
        }
    }
    out
}

fn parse_values(dim: Dim, text: &str) -> Result<u8, FeatureParseError> {
    let text = text.trim();
    if text == "_" || text == "*" {
        return Ok(full_mask(dim));
    }
    let mut mask = 0u8;
    for part in text.split('+') {
        let v = dim
            .parse_value(part.trim())
            .ok_or_else(|| FeatureParseError::UnknownValue(String::from(part.trim())))?;
        mask |= 1 << v;
    }
    Ok(mask)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FeatureParseError {
    #[error("unknown feature value `{0}`")]
    UnknownValue(String),
    #[error("malformed feature term `{0}` (expected CAS.NUM.GEN)")]
    MalformedTerm(String),
    #[error("empty feature set")]
    Empty,
}

impl FromStr for FeatureSet {
    type Err = FeatureParseError;

    fn from_str(s: &str) -> Result<FeatureSet, FeatureParseError> {
        let s = s.trim();
        if s == "_" {
            return Ok(FeatureSet::ALL);
        }
        let mut set = FeatureSet::EMPTY;
        for term in s.split(',') {
            let term = term.trim();
            let parts: Vec<&str> = term.split('.').collect();
            if parts.len() != 3 {
                return Err(FeatureParseError::MalformedTerm(String::from(term)));
            }
            let mut t = FeatureSet::ALL;
            for (dim, part) in Dim::ALL.into_iter().zip(parts) {
                t = t.intersect(expand_dim(dim, parse_values(dim, part)?));
            }
            set = set.union(t);
        }
        if set.is_empty() {
            return Err(FeatureParseError::Empty);
        }
        Ok(set)
    }
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_full() {
            return f.write_str("_");
        }
        if self.is_empty() {
            return f.write_str("0");
        }
        // (cas, num) -> gender mask
        let mut cell = [[0u8; 2]; 4];
        for i in 0..TRIPLES {
            if self.0 & (1 << i) != 0 {
                let [c, n, g] = split(i);
                cell[c][n] |= 1 << g;
            }
        }
        // (num, gender mask) -> case mask
        let mut by_num_gen: Vec<(usize, u8, u8)> = Vec::new();
        for n in 0..2 {
            for c in 0..4 {
                let g = cell[c][n];
                if g == 0 {
                    continue;
                }
                match by_num_gen.iter_mut().find(|(n2, g2, _)| *n2 == n && *g2 == g) {
                    Some(entry) => entry.2 |= 1 << c,
                    None => by_num_gen.push((n, g, 1 << c)),
                }
            }
        }
        // (case mask, gender mask) -> number mask
        let mut terms: Vec<(u8, u8, u8)> = Vec::new();
        for (n, g, c) in by_num_gen {
            match terms.iter_mut().find(|(c2, _, g2)| *c2 == c && *g2 == g) {
                Some(entry) => entry.1 |= 1 << n,
                None => terms.push((c, 1 << n, g)),
            }
        }
        for (i, (c, n, g)) in terms.into_iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(
                f,
                "{}.{}.{}",
                render_values(Dim::Cas, c),
                render_values(Dim::Num, n),
                render_values(Dim::Gen, g)
            )?;
        }
        Ok(())
    }
}

impl fmt::Debug for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FeatureSet({})", self)
    }
}
