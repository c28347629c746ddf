use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::form::{parse_frame, CaseFrame};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SemCategory {
    Concept,
    Property,
    Relation,
}

impl SemCategory {
    pub const ALL: [SemCategory; 3] = [SemCategory::Concept, SemCategory::Property, SemCategory::Relation];

    pub fn as_str(self) -> &'static str {
        match self {
            SemCategory::Concept => "CONCEPT",
            SemCategory::Property => "PROPERTY",
            SemCategory::Relation => "RELATION",
        }
    }

    pub fn parse(s: &str) -> Option<SemCategory> {
        SemCategory::ALL.into_iter().find(|c| c.as_str() == s)
    }

    /// Whether a token tagged `pos` (`None` for an untagged word) may carry
    /// this category.
    pub fn compatible_with(self, pos: Option<&str>) -> bool {
        let Some(pos) = pos else { return true };
        let ok: &[&str] = match self {
            SemCategory::Concept => &["N", "XXX"],
            SemCategory::Property => &["ADJ", "ADV", "XXX"],
            SemCategory::Relation => &["V", "PRP", "XXX"],
        };
        ok.contains(&pos)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemEntry {
    pub surface: String,
    pub category: SemCategory,
    pub sem_type: String,
    pub desc: String,
    pub frame: Option<CaseFrame>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {reason}")]
pub struct SemLexiconError {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct SemLexicon {
    entries: Vec<SemEntry>,
    by_surface: BTreeMap<String, Vec<usize>>,
}

impl SemLexicon {
    pub fn new() -> SemLexicon {
        SemLexicon::default()
    }

    /// Reads `surface <TAB> category <TAB> type <TAB> desc <TAB> frame|-`.
    pub fn parse(text: &str) -> Result<SemLexicon, SemLexiconError> {
        let mut lex = SemLexicon::new();
        for (i, line) in text.lines().enumerate() {
            let err = |reason: String| SemLexiconError { line: i + 1, reason };
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = line.split('\t').map(str::trim).collect();
            if f.len() != 5 {
                return Err(err(String::from("expected `surface<TAB>category<TAB>type<TAB>desc<TAB>frame`")));
            }
            if f[0].is_empty() || f[0].contains(char::is_whitespace) {
                return Err(err(format!("invalid surface `{}`", f[0])));
            }
            let category = SemCategory::parse(f[1]).ok_or_else(|| err(format!("unknown category `{}`", f[1])))?;
            if f[2].is_empty() || f[2].contains(|c: char| c.is_whitespace() || c == ',' || c == ':') {
                return Err(err(format!("invalid type `{}`", f[2])));
            }
            let frame = match f[4] {
                "-" | "" => None,
                spec => Some(parse_frame(spec).map_err(|e| err(e.to_string()))?),
            };
            lex.insert(SemEntry {
                surface: f[0].to_string(),
                category,
                sem_type: f[2].to_string(),
                desc: f[3].to_string(),
                frame,
            });
        }
        Ok(lex)
    }

    pub fn insert(&mut self, e: SemEntry) {
        self.by_surface.entry(e.surface.clone()).or_default().push(self.entries.len());
        self.entries.push(e);
    }

    pub fn entries(&self) -> &[SemEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries for a token: exact surface, else its lowercase form.
    pub fn lookup(&self, token: &str) -> Vec<&SemEntry> {
        let hit = self.by_surface.get(token).or_else(|| self.by_surface.get(&token.to_lowercase()));
        hit.map(|idx| idx.iter().map(|&i| &self.entries[i]).collect()).unwrap_or_default()
    }
}
