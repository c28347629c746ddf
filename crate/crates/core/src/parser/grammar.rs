//! Grammar rules with agreement groups, constant constraints and licensed
//! unknown tokens.
//!
//! One rule per line:
//!
//! ```text
//! %module core
//! NP2: NP[TYPE=FULL, @a, show=CAS.NUM.GEN] -> DETD[@a] N[@a]
//! NP3: NP[TYPE=FULL, @a, show=CAS.NUM.GEN] -> DETI[@a] ADJ|XXX[@a] N[@a]
//! PP1: PP[norule, @c:CAS, show=CAS] -> PRP[@c:CAS, show=CAS] NP[@c:CAS]
//! ```
//!
//! Bracket items:
//!
//! * `@g` / `@g:CAS+NUM`: agreement group `g` over all / the listed
//!   dimensions; every group must be mentioned at least twice in a rule,
//! * `CAS=GEN`, `NUM=SG+PL`: constant constraints,
//! * `show=CAS.NUM.GEN`: feature attributes printed for the node, in order,
//! * on the left-hand side only: `norule` (omit the `RULE` attribute) and
//!   any other `KEY=VALUE` as an output attribute.
//!
//! `ADJ|XXX` accepts an `ADJ` or an unknown token, which is then assumed to
//! be an `ADJ`. `%enabled no` switches a module off.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::annotation::is_valid_name;
use crate::features::{Dim, DimMask, FeatureSet};
use crate::postag::UNKNOWN;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constituent {
    /// Accepted categories; the first is the class assumed for an unknown
    /// token.
    pub cats: Vec<String>,
    pub accepts_unknown: bool,
    pub constants: FeatureSet,
    pub groups: Vec<(String, DimMask)>,
    pub show: Vec<Dim>,
}

impl Constituent {
    pub fn accepts(&self, cat: &str) -> bool {
        self.cats.iter().any(|c| c == cat) || (self.accepts_unknown && cat == UNKNOWN)
    }

    pub fn assumed_class(&self) -> &str {
        &self.cats[0]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrammarRule {
    pub id: String,
    pub lhs: String,
    pub lhs_constants: FeatureSet,
    pub lhs_groups: Vec<(String, DimMask)>,
    pub show: Vec<Dim>,
    pub attrs: Vec<(String, String)>,
    pub norule: bool,
    pub rhs: Vec<Constituent>,
}

impl GrammarRule {
    /// Distinct group names in order of first mention.
    pub fn group_names(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        let all = self.lhs_groups.iter().chain(self.rhs.iter().flat_map(|c| c.groups.iter()));
        for (g, _) in all {
            if !out.contains(&g.as_str()) {
                out.push(g);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrammarModule {
    pub name: String,
    pub rules: Vec<GrammarRule>,
    pub enabled: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GrammarError {
    #[error("{module}:{line}: {reason}")]
    Format { module: String, line: usize, reason: String },
    #[error("rule `{id}` defined in both `{first}` and `{second}`")]
    DuplicateRuleId { id: String, first: String, second: String },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Grammar {
    pub rules: Vec<GrammarRule>,
    /// Module of each rule, parallel to `rules`.
    pub rule_modules: Vec<String>,
}

impl Grammar {
    /// Union of the enabled modules; rule ids must be unique across them.
    pub fn from_modules(modules: &[GrammarModule]) -> Result<Grammar, GrammarError> {
        let mut g = Grammar::default();
        let mut seen: BTreeMap<String, String> = BTreeMap::new();
        for m in modules.iter().filter(|m| m.enabled) {
            for r in &m.rules {
                if let Some(first) = seen.get(&r.id) {
                    return Err(GrammarError::DuplicateRuleId {
                        id: r.id.clone(),
                        first: first.clone(),
                        second: m.name.clone(),
                    });
                }
                seen.insert(r.id.clone(), m.name.clone());
                g.rules.push(r.clone());
                g.rule_modules.push(m.name.clone());
            }
        }
        Ok(g)
    }

    pub fn rule(&self, id: &str) -> Option<&GrammarRule> {
        self.rules.iter().find(|r| r.id == id)
    }
}

/// Parses one module file; `default_name` is used unless the file sets
/// `%module`.
pub fn parse_module(default_name: &str, text: &str) -> Result<GrammarModule, GrammarError> {
    let mut module = GrammarModule {
        name: String::from(default_name),
        rules: Vec::new(),
        enabled: true,
    };
    let mut ids: BTreeMap<String, usize> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let err = |reason: String, module: &GrammarModule| GrammarError::Format {
            module: module.name.clone(),
            line: i + 1,
            reason,
        };
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('%') {
            let (key, value) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
            match (key, value.trim()) {
                ("module", name) if !name.is_empty() => module.name = String::from(name),
                ("enabled", "yes") => module.enabled = true,
                ("enabled", "no") => module.enabled = false,
                _ => return Err(err(format!("unknown directive `%{}`", rest), &module)),
            }
            continue;
        }
        let rule = parse_rule(line).map_err(|r| err(r, &module))?;
        if ids.insert(rule.id.clone(), i + 1).is_some() {
            return Err(GrammarError::DuplicateRuleId {
                id: rule.id,
                first: module.name.clone(),
                second: module.name.clone(),
            });
        }
        module.rules.push(rule);
    }
    Ok(module)
}

struct Term<'a> {
    cats: Vec<&'a str>,
    items: Vec<&'a str>,
}

/// Splits `A|B[x, y] C D[z]` into terms.
fn split_terms(s: &str) -> Result<Vec<Term<'_>>, String> {
    let mut out = Vec::new();
    let mut rest = s.trim_start();
    while !rest.is_empty() {
        let end = rest.find(|c: char| c == '[' || c.is_whitespace()).unwrap_or(rest.len());
        let head = &rest[..end];
        if head.is_empty() {
            return Err(format!("expected category at `{}`", rest));
        }
        rest = &rest[end..];
        let mut items = Vec::new();
        if let Some(after) = rest.strip_prefix('[') {
            let close = after.find(']').ok_or_else(|| format!("unclosed `[` after `{}`", head))?;
            items = after[..close].split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
            rest = &after[close + 1..];
        }
        out.push(Term {
            cats: head.split('|').collect(),
            items,
        });
        rest = rest.trim_start();
    }
    Ok(out)
}

struct Items {
    constants: FeatureSet,
    groups: Vec<(String, DimMask)>,
    show: Vec<Dim>,
    attrs: Vec<(String, String)>,
    norule: bool,
}

fn parse_items(items: &[&str], lhs: bool) -> Result<Items, String> {
    let mut out = Items {
        constants: FeatureSet::ALL,
        groups: Vec::new(),
        show: Vec::new(),
        attrs: Vec::new(),
        norule: false,
    };
    for &item in items {
        if let Some(g) = item.strip_prefix('@') {
            let (name, dims) = match g.split_once(':') {
                Some((n, d)) => {
                    let mut mask = DimMask::NONE;
                    for part in d.split('+') {
                        let dim = Dim::parse(part.trim()).ok_or_else(|| format!("unknown dimension `{}`", part))?;
                        mask = mask.with(dim);
                    }
                    (n, mask)
                }
                None => (g, DimMask::ALL),
            };
            if name.is_empty() || !name.chars().all(|c| c.is_alphanumeric() || c == '_') {
                return Err(format!("invalid group name `{}`", name));
            }
            out.groups.push((String::from(name), dims));
        } else if item == "norule" && lhs {
            out.norule = true;
        } else if let Some((key, value)) = item.split_once('=') {
            let (key, value) = (key.trim(), value.trim());
            if key == "show" {
                for part in value.split('.') {
                    let dim = Dim::parse(part.trim()).ok_or_else(|| format!("unknown dimension `{}`", part))?;
                    if out.show.contains(&dim) {
                        return Err(format!("dimension {} shown twice", dim.as_str()));
                    }
                    out.show.push(dim);
                }
            } else if let Some(dim) = Dim::parse(key) {
                let f = FeatureSet::from_dim_value(dim, value).map_err(|e| e.to_string())?;
                out.constants = out.constants.intersect(f);
            } else if lhs {
                if !is_valid_name(key) || out.attrs.iter().any(|(k, _)| k == key) || key == "RULE" {
                    return Err(format!("invalid or repeated attribute `{}`", key));
                }
                out.attrs.push((String::from(key), String::from(value)));
            } else {
                return Err(format!("unknown constraint `{}`", item));
            }
        } else {
            return Err(format!("unknown item `{}`", item));
        }
    }
    if out.constants.is_empty() {
        return Err(String::from("contradictory constant constraints"));
    }
    Ok(out)
}

pub fn parse_rule(line: &str) -> Result<GrammarRule, String> {
    let (id, rest) = line.split_once(':').ok_or("expected `ID: LHS -> RHS`")?;
    let id = id.trim();
    if id.is_empty() || id.chars().any(|c| c.is_whitespace() || c == '"') {
        return Err(format!("invalid rule id `{}`", id));
    }
    let (lhs, rhs) = rest.split_once("->").ok_or("missing `->`")?;
    let lhs_terms = split_terms(lhs)?;
    if lhs_terms.len() != 1 || lhs_terms[0].cats.len() != 1 {
        return Err(String::from("left-hand side must be a single category"));
    }
    let lhs_cat = lhs_terms[0].cats[0];
    if lhs_cat == UNKNOWN || !is_valid_name(lhs_cat) {
        return Err(format!("invalid left-hand category `{}`", lhs_cat));
    }
    let l = parse_items(&lhs_terms[0].items, true)?;
    let mut rule = GrammarRule {
        id: String::from(id),
        lhs: String::from(lhs_cat),
        lhs_constants: l.constants,
        lhs_groups: l.groups,
        show: l.show,
        attrs: l.attrs,
        norule: l.norule,
        rhs: Vec::new(),
    };
    for t in split_terms(rhs)? {
        let mut cats = Vec::new();
        let mut accepts_unknown = false;
        for c in &t.cats {
            if *c == UNKNOWN {
                accepts_unknown = true;
            } else if is_valid_name(c) {
                cats.push(String::from(*c));
            } else {
                return Err(format!("invalid category `{}`", c));
            }
        }
        if cats.is_empty() {
            return Err(String::from("an unknown-token slot needs a category to assume"));
        }
        let it = parse_items(&t.items, false)?;
        rule.rhs.push(Constituent {
            cats,
            accepts_unknown,
            constants: it.constants,
            groups: it.groups,
            show: it.show,
        });
    }
    if rule.rhs.is_empty() {
        return Err(String::from("empty right-hand side"));
    }
    for g in rule.group_names() {
        let mentions = rule.lhs_groups.iter().filter(|(n, _)| n == g).count()
            + rule.rhs.iter().map(|c| c.groups.iter().filter(|(n, _)| n == g).count()).sum::<usize>();
        if mentions < 2 {
            return Err(format!("group `@{}` is mentioned only once", g));
        }
    }
    Ok(rule)
}

fn write_items(f: &mut fmt::Formatter<'_>, items: &[String]) -> fmt::Result {
    if !items.is_empty() {
        write!(f, "[{}]", items.join(", "))?;
    }
    Ok(())
}

fn group_items(groups: &[(String, DimMask)]) -> Vec<String> {
    groups
        .iter()
        .map(|(g, dims)| {
            if *dims == DimMask::ALL {
                format!("@{}", g)
            } else {
                let d: Vec<&str> = Dim::ALL.into_iter().filter(|d| dims.contains(*d)).map(Dim::as_str).collect();
                format!("@{}:{}", g, d.join("+"))
            }
        })
        .collect()
}

fn constant_items(f: FeatureSet) -> Vec<String> {
    Dim::ALL
        .into_iter()
        .filter(|d| f.lift(DimMask::single(*d)) != FeatureSet::ALL)
        .map(|d| format!("{}={}", d.as_str(), f.render_dim(d)))
        .collect()
}

fn show_item(show: &[Dim]) -> Option<String> {
    (!show.is_empty()).then(|| {
        let d: Vec<&str> = show.iter().map(|d| d.as_str()).collect();
        format!("show={}", d.join("."))
    })
}

impl fmt::Display for GrammarRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.id, self.lhs)?;
        let mut items: Vec<String> = Vec::new();
        if self.norule {
            items.push(String::from("norule"));
        }
        items.extend(self.attrs.iter().map(|(k, v)| format!("{}={}", k, v)));
        items.extend(group_items(&self.lhs_groups));
        items.extend(constant_items(self.lhs_constants));
        items.extend(show_item(&self.show));
        write_items(f, &items)?;
        f.write_str(" ->")?;
        for c in &self.rhs {
            write!(f, " {}", c.cats.join("|"))?;
            if c.accepts_unknown {
                write!(f, "|{}", UNKNOWN)?;
            }
            let mut items = group_items(&c.groups);
            items.extend(constant_items(c.constants));
            items.extend(show_item(&c.show));
            write_items(f, &items)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CORE: &str = "%module core\n\
        NP1: NP[TYPE=FULL, @a, show=CAS.NUM.GEN] -> N[@a]\n\
        NP3: NP[TYPE=FULL, @a, show=CAS.NUM.GEN] -> DETI[@a] ADJ|XXX[@a] N[@a]\n\
        PP1: PP[norule, @c:CAS, show=CAS] -> PRP[@c:CAS, show=CAS] NP[@c:CAS]\n\
        NPC1: NP[TYPE=COMPLEX, @a, show=GEN.NUM.CAS] -> NP[@a] NP[CAS=GEN]\n";

    #[test]
    fn parses_rules() {
        let m = parse_module("x", CORE).unwrap();
        assert_eq!(m.name, "core");
        assert_eq!(m.rules.len(), 4);
        let np3 = &m.rules[1];
        assert!(np3.rhs[1].accepts("XXX"));
        assert!(np3.rhs[1].accepts("ADJ"));
        assert!(!np3.rhs[2].accepts("XXX"));
        assert_eq!(np3.rhs[1].assumed_class(), "ADJ");
        let pp = &m.rules[2];
        assert!(pp.norule);
        assert_eq!(pp.rhs[0].show, [Dim::Cas]);
        assert_eq!(pp.lhs_groups[0].1, DimMask::single(Dim::Cas));
        let npc1 = &m.rules[3];
        assert_eq!(npc1.rhs[1].constants.render_dim(Dim::Cas), "GEN");
        assert_eq!(npc1.attrs, [("TYPE".to_string(), "COMPLEX".to_string())]);
    }

    #[test]
    fn display_round_trips() {
        for r in parse_module("x", CORE).unwrap().rules {
            assert_eq!(parse_rule(&r.to_string()).unwrap(), r);
        }
    }

    #[test]
    fn rejects_bad_rules() {
        for bad in [
            "R: NP -> ",
            "R NP -> N",
            "R: XXX -> N",
            "R: NP -> XXX",
            "R: NP[@a] -> N",
            "R: NP -> N[FOO=1]",
            "R: NP -> N[CAS=XYZ]",
            "R: NP -> N[CAS=NOM, CAS=GEN]",
            "R: NP -> N[show=CAS.CAS]",
            "R: NP[show=FOO] -> N",
            "R: NP -> N[@a:FOO] N[@a]",
            "R: NP -> N[",
        ] {
            assert!(parse_rule(bad).is_err(), "{}", bad);
        }
    }

    #[test]
    fn module_union_and_duplicates() {
        let core = parse_module("core", CORE).unwrap();
        let tel = parse_module("tel", "TEL1: TEL[TYPE=FINDING] -> N|XXX ADJ|XXX IP\n").unwrap();
        let g = Grammar::from_modules(&[core.clone(), tel]).unwrap();
        assert_eq!(g.rules.len(), 5);
        assert_eq!(g.rule_modules[4], "tel");
        let dup = parse_module("dup", "NP1: NP -> N\n").unwrap();
        assert!(matches!(
            Grammar::from_modules(&[core.clone(), dup]),
            Err(GrammarError::DuplicateRuleId { .. })
        ));
        assert!(matches!(parse_module("m", "A: X -> Y\nA: X -> Z\n"), Err(GrammarError::DuplicateRuleId { .. })));
        let off = parse_module("off", "%enabled no\nNP1: NP -> N\n").unwrap();
        assert_eq!(Grammar::from_modules(&[core, off]).unwrap().rules.len(), 4);
    }
}
