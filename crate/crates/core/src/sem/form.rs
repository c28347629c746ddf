use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::features::Case;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhraseKind {
    N,
    P,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Obligation {
    Fak,
    Obl,
}

/// Syntactic form of a slot filler: `N(gen, fak)` is an optional genitive
/// noun phrase, `P(akk, fak, durch)` an optional accusative `durch` phrase.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FormConstraint {
    pub kind: PhraseKind,
    pub case: Case,
    pub obligation: Obligation,
    pub preposition: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid form `{text}`: {reason}")]
pub struct FormSyntaxError {
    pub text: String,
    pub reason: String,
}

fn case_name(c: Case) -> &'static str {
    match c {
        Case::Nom => "nom",
        Case::Gen => "gen",
        Case::Dat => "dat",
        Case::Akk => "akk",
    }
}

pub fn parse_form(text: &str) -> Result<FormConstraint, FormSyntaxError> {
    let err = |reason: &str| FormSyntaxError {
        text: text.to_string(),
        reason: reason.to_string(),
    };
    let t = text.trim();
    let open = t.find('(').ok_or_else(|| err("missing `(`"))?;
    if !t.ends_with(')') {
        return Err(err("missing `)`"));
    }
    let kind = match t[..open].trim() {
        "N" => PhraseKind::N,
        "P" => PhraseKind::P,
        _ => return Err(err("phrase kind must be N or P")),
    };
    let args: Vec<&str> = t[open + 1..t.len() - 1].split(',').map(str::trim).collect();
    let expected = if kind == PhraseKind::N { 2 } else { 3 };
    if args.len() != expected {
        return Err(err(if kind == PhraseKind::N {
            "N takes case and obligation"
        } else {
            "P takes case, obligation and preposition"
        }));
    }
    let case = Case::parse(&args[0].to_uppercase()).ok_or_else(|| err("unknown case"))?;
    let obligation = match args[1] {
        "fak" => Obligation::Fak,
        "obl" => Obligation::Obl,
        _ => return Err(err("obligation must be fak or obl")),
    };
    let preposition = match kind {
        PhraseKind::N => None,
        PhraseKind::P => {
            let p = args[2];
            if p.is_empty() || p.chars().any(|c| c.is_whitespace() || "(),:;".contains(c)) {
                return Err(err("invalid preposition"));
            }
            Some(p.to_string())
        }
    };
    Ok(FormConstraint {
        kind,
        case,
        obligation,
        preposition,
    })
}

impl FromStr for FormConstraint {
    type Err = FormSyntaxError;

    fn from_str(s: &str) -> Result<FormConstraint, FormSyntaxError> {
        parse_form(s)
    }
}

impl fmt::Display for FormConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ob = match self.obligation {
            Obligation::Fak => "fak",
            Obligation::Obl => "obl",
        };
        match (&self.kind, &self.preposition) {
            (PhraseKind::P, Some(p)) => write!(f, "P({}, {}, {})", case_name(self.case), ob, p),
            _ => write!(f, "N({}, {})", case_name(self.case), ob),
        }
    }
}

/// A frame slot: relation name, alternative forms, optional semantic type
/// of the filler's head.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slot {
    pub relation: String,
    pub forms: Vec<FormConstraint>,
    pub sem_type: Option<String>,
}

impl Slot {
    pub fn is_obligatory(&self) -> bool {
        self.forms.iter().any(|f| f.obligation == Obligation::Obl)
    }

    /// The slot's forms separated by spaces.
    pub fn forms_text(&self) -> String {
        let v: Vec<String> = self.forms.iter().map(|f| f.to_string()).collect();
        v.join(" ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CaseFrame {
    pub slots: Vec<Slot>,
}

/// Parses `REL:form[,form]*[:semtype](;REL:...)*`.
pub fn parse_frame(text: &str) -> Result<CaseFrame, FormSyntaxError> {
    let err = |reason: String| FormSyntaxError {
        text: text.to_string(),
        reason,
    };
    let mut frame = CaseFrame::default();
    for part in text.split(';') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (relation, rest) = part.split_once(':').ok_or_else(|| err(format!("slot `{}` lacks `REL:`", part)))?;
        let relation = relation.trim();
        if relation.is_empty() || !crate::annotation::is_valid_name(relation) {
            return Err(err(format!("invalid relation name `{}`", relation)));
        }
        let mut forms = Vec::new();
        let mut sem_type = None;
        let mut rest = rest.trim_start();
        while !rest.is_empty() {
            if let Some(t) = rest.strip_prefix(':') {
                let t = t.trim();
                if t.is_empty() || t.contains(|c: char| c.is_whitespace() || c == ',') {
                    return Err(err(format!("invalid semantic type `{}`", t)));
                }
                sem_type = Some(t.to_string());
                break;
            }
            let close = rest.find(')').ok_or_else(|| err(String::from("unclosed form")))?;
            forms.push(parse_form(&rest[..=close])?);
            rest = rest[close + 1..].trim_start_matches(|c: char| c == ',' || c.is_whitespace());
        }
        if forms.is_empty() {
            return Err(err(format!("slot `{}` has no forms", relation)));
        }
        frame.slots.push(Slot {
            relation: relation.to_string(),
            forms,
            sem_type,
        });
    }
    Ok(frame)
}

impl fmt::Display for CaseFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.slots.iter().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            write!(f, "{}:", s.relation)?;
            for (j, form) in s.forms.iter().enumerate() {
                if j > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{}", form)?;
            }
            if let Some(t) = &s.sem_type {
                write!(f, ":{}", t)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_forms() {
        let f = parse_form("P(akk, fak, durch)").unwrap();
        assert_eq!((f.kind, f.case, f.obligation), (PhraseKind::P, Case::Akk, Obligation::Fak));
        assert_eq!(f.preposition.as_deref(), Some("durch"));
        let f = parse_form("N(gen, fak)").unwrap();
        assert_eq!(f.preposition, None);
        assert_eq!(f.to_string(), "N(gen, fak)");
        for bad in ["Q(x)", "N(gen)", "P(akk, fak)", "N(xyz, fak)", "N(gen, maybe)", "P(dat, obl, a b)", "N(gen, fak"] {
            assert!(parse_form(bad).is_err(), "{}", bad);
        }
    }

    #[test]
    fn parses_frames() {
        let fr = parse_frame("RESULT:N(gen, fak),P(akk, fak, von);SOURCE:P(dat, fak, aus):material;INSTRUMENT:P(akk, obl, durch)").unwrap();
        assert_eq!(fr.slots.len(), 3);
        assert_eq!(fr.slots[0].forms_text(), "N(gen, fak) P(akk, fak, von)");
        assert_eq!(fr.slots[1].sem_type.as_deref(), Some("material"));
        assert!(fr.slots[2].is_obligatory());
        assert_eq!(parse_frame(&fr.to_string()).unwrap(), fr);
        assert!(parse_frame("RESULT").is_err());
        assert!(parse_frame("RESULT:").is_err());
    }

    fn arb_form() -> impl Strategy<Value = FormConstraint> {
        (any::<bool>(), 0..4usize, any::<bool>(), "[a-z]{1,8}").prop_map(|(p, c, o, prep)| FormConstraint {
            kind: if p { PhraseKind::P } else { PhraseKind::N },
            case: Case::ALL[c],
            obligation: if o { Obligation::Obl } else { Obligation::Fak },
            preposition: p.then_some(prep),
        })
    }

    proptest! {
        #[test]
        fn form_round_trip(f in arb_form()) {
            prop_assert_eq!(parse_form(&f.to_string()).unwrap(), f);
        }
    }
}
